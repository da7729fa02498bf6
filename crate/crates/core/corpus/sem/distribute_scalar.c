float x, a, b, c;
x = a*c + b*c;
