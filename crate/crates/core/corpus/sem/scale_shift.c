float w[N], v[N], s, t;
for (int i = 0; i < N; i++)
    w[i] = s*v[i];
for (int i = 0; i < N; i++)
    w[i] += t;
