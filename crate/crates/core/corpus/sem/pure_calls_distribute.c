float x, y, a, b;
#pragma stml pure F
float F(float z) {
    return 2*z - 1;
}
x = F(a)*y + F(b)*y;
