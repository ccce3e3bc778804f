#include <cstdio>

int main() {
  std::puts("hnls: placeholder");
  return 0;
}
