float c[N], d[N], v[N], t;
for (int i = 0; i < N; i++) {
    t = v[i];
    c[i] = t;
}
for (int i = 0; i < N; i++)
    d[i] = t*2;
