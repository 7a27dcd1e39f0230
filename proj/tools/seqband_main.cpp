#include "seqband/cli.hpp"

int main(int argc, char** argv)
{
    return seqband::run_cli(argc, argv);
}
