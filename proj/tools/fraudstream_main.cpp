#include <cstdio>

int main() {
    std::puts("fraudstream: work in progress");
    return 0;
}
