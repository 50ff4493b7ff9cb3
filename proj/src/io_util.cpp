#include "sefi/io_util.hpp"

#include "sefi/error.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace sefi {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::string format_provenance(const Provenance& prov) {
  std::string out;
  for (const auto& [key, value] : prov) out += key + ": " + value + "\n";
  return out;
}

Provenance parse_provenance(const std::string& text) {
  Provenance prov;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto sep = line.find(": ");
    if (sep == std::string::npos) continue;
    prov[line.substr(0, sep)] = line.substr(sep + 2);
  }
  return prov;
}

}  // namespace sefi
