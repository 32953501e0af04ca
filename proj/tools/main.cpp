#include <cstdio>

int main() {
    std::printf("sama cli placeholder\n");
    return 0;
}
