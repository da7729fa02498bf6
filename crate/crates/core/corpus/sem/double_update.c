float c[N], d[N], v[N], w[N], a;
for (int i = 0; i < N; i++) {
    c[i] += a*v[i];
    d[i] += a*w[i];
}
