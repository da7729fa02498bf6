float c[N], v[N], a, b;
k = a + b;
for (int i = 0; i < N; i++) {
    c[i] = k*v[i];
}
