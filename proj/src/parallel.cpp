#include "chaosflow/parallel.hpp"

#include <cstdlib>
#include <string>

namespace chaosflow
{

int resolve_threads(int requested)
{
    if (requested > 0)
        return requested;
    if (const char* env = std::getenv("CHAOSFLOW_THREADS"))
    {
        try
        {
            const int n = std::stoi(env);
            if (n > 0)
                return n;
        }
        catch (const std::exception&)
        {
        }
    }
    return 1;
}

} // namespace chaosflow
