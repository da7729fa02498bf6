float m[N][N], x[N], a;
for (int i = 0; i < N; i++)
    for (int j = 0; j < N; j++)
        m[i][j] = a*x[j] + a*x[i];
