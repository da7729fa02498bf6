float c[N], d[N], v[N], a, b;
#pragma stml pure F
float F(float x) {
    return x*x + 1;
}
for (int i = 0; i < N; i++)
    c[i] = F(v[i]);
for (int i = 0; i < N; i++)
    d[i] = c[i] + a*b;
