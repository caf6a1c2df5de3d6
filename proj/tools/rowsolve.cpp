#include "rowsolve/cli.hpp"

int main(int argc, char** argv)
{
    return rowsolve::cli_main(argc, argv);
}
