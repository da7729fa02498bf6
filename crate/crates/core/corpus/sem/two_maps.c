float p[N], q[N], v[N];
for (int i = 0; i < N; i++)
    p[i] = v[i] + 1;
for (int i = 0; i < N; i++)
    q[i] = v[i]*2;
