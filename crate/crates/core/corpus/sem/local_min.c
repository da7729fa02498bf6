float c[N], v[N], a;
for (int i = 0; i < N - 1; i++) {
    c[i+1] = a*v[i];
    c[i+1] += v[i];
}
