float c[N], d[N], v[N];
for (int i = 0; i < N; i++)
    c[i] = v[i];
for (int i = 0; i < N; i++)
    d[i] = c[i]*2;
