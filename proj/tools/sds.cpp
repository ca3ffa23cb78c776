#include <cstdio>

int main() {
    std::puts("sds: placeholder");
    return 0;
}
