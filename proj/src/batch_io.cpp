#include <bit>
#include <cstring>
#include <fstream>

#include "irf/engine.hpp"
#include "irf/errors.hpp"

namespace irf {
namespace {

constexpr char kMagic[4] = {'I', 'R', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "batch files assume a little-endian host");

}  // namespace

void write_batch(const std::string& path, const SampleBatch& batch, std::string_view config_echo) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  const std::uint64_t count = batch.values.size();
  os.write(kMagic, 4);
  os.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  os.write(reinterpret_cast<const char*>(batch.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!os) throw ConfigError("write to '" + path + "' failed");

  std::ofstream side(path + ".cfg", std::ios::trunc);
  if (!side) throw ConfigError("cannot open '" + path + ".cfg' for writing");
  side << config_echo;
  if (!config_echo.empty() && config_echo.back() != '\n') side << '\n';
}

std::vector<double> read_batch(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open batch file '" + path + "'");
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("'" + path + "' is not a batch file");
  if (version != kVersion) throw ConfigError("unsupported batch file version " + std::to_string(version));
  std::vector<double> values(count);
  is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!is) throw ConfigError("batch file '" + path + "' is truncated");
  return values;
}

}  // namespace irf
