#include "respdens/rng.hpp"

namespace respdens {

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t replication,
                       std::uint64_t stream)
  : key_(mix64(mix64(mix64(master_seed) ^ (replication + 0x632be59bd9b4e019ULL)) ^
               (stream + 0x8cb92ba72f3d8dd7ULL)))
{}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t rep)
{
  return mix64(mix64(master_seed ^ 0xd1b54a32d192ed03ULL) + rep);
}

} // namespace respdens
