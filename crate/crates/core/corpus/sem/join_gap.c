float x, y, a, b, c;
x = a*b;
y = c;
x = x + y;
