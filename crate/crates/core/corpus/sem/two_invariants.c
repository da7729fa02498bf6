float c[N], v[N], w[N], a, b;
for (int i = 0; i < N; i++)
    c[i] = (a + b)*v[i] + (a - b)*w[i];
