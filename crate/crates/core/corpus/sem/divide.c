float c[N], v[N], a, b;
for (int i = 0; i < N; i++)
    c[i] = v[i]/(a + b);
