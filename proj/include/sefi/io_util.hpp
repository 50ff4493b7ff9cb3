#pragma once

#include <map>
#include <string>

namespace sefi {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

/// Flat `key: value` provenance sidecar, keys in sorted order.
using Provenance = std::map<std::string, std::string>;

std::string format_provenance(const Provenance& prov);
Provenance parse_provenance(const std::string& text);

/// Sidecar path written next to an output file.
inline std::string provenance_path(const std::string& output) { return output + ".provenance.txt"; }

}  // namespace sefi
