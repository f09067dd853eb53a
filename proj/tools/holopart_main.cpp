#include <cstdio>
int main() { std::puts("holopart (placeholder)"); return 0; }
