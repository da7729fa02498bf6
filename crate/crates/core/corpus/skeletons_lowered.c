float c[N], v[N], a, b;

#pragma polca map BODY1 v c
#pragma stml reads v in {0}
#pragma stml writes c in {0}
#pragma stml same_length v c
#pragma stml pure BODY1
#pragma stml iteration_space 0 length(v)
#pragma stml iteration_independent
for(int i = 0; i < N; i++)
#pragma polca def BODY1
#pragma polca input v[i]
#pragma polca output c[i]
   c[i] = a*v[i];

#pragma polca zipWith BODY2  v c c
#pragma stml reads v in {0} 
#pragma stml reads c in {0}
#pragma stml writes c in {0}
#pragma stml same_length v c
#pragma stml pure BODY2
#pragma stml iteration_space 0 length(v)
#pragma stml iteration_independent
for(int i = 0; i < N; i++)
#pragma polca def BODY2
#pragma polca input v[i]
#pragma polca input c[i]
#pragma polca output c[i]
   c[i] += b*v[i];
