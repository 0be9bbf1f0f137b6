#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "bianchi/mp.hpp"

int main(int argc, char** argv) {
    bianchi::PrecisionScope prec(50);
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
