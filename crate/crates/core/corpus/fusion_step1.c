float c[N], v[N], a, b;
for (int i = 0; i < N; i++) {
    c[i] = a*v[i];
    c[i] += b*v[i];
}
