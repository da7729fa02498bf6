float x, a, b, c;
x = a;
x = x + b;
x = x*c;
