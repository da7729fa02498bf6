float s, a, b, c;
s = a;
s += b;
s += c;
