float x, y, a, b;
if (a > b)
    x = a*y + b*y;
else
    x = 0;
