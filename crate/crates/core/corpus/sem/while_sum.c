float v[N], s, a;
int k;
k = 0;
s = 0;
while (k < N) {
    s += a*v[k];
    k++;
}
