int h[N], g[N];
for (int i = 0; i < N; i++)
    h[i] = 3*g[i] + 5*g[i];
