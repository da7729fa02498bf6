float c[N], d[N], v[N];
for (int i = 0; i < N - 1; i++)
    c[i] = v[i];
for (int i = 0; i < N - 1; i++)
    d[i] = c[i+1];
