#include "cflab/cli.hpp"

int main(int argc, char** argv)
{
    return cflab::cli::main(argc, argv);
}
