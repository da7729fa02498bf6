float v[N], s, a;
s = 0;
for (int i = 0; i < N; i++)
    s += v[i]*a;
