#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "afdx/models.hpp"

namespace afdx {

/// One line of the topology CSV: `vlid,src,dst,bag,size` with dst a
/// double-quoted comma-separated ES list.
struct CsvRow {
    VlId vlid = 0;
    EsId src = 0;
    std::vector<EsId> dests;
    Ns bag = 0;
    ByteSize size;
    bool operator==(const CsvRow&) const = default;
};

struct CsvTopology {
    std::vector<CsvRow> rows;
    bool operator==(const CsvTopology&) const = default;
};

class CsvError : public std::runtime_error {
  public:
    CsvError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// Strict parsing also rejects AFDX-illegal bag/size values; lenient
/// parsing keeps them so a validator can report them as violations.
CsvTopology parse_csv(std::string_view text, bool strict = true);

/// Inverse of parse_csv; parse(emit(t)) == t and emitting a parsed
/// file reproduces it byte for byte (modulo trailing newline).
std::string emit_csv(const CsvTopology& topo);

struct RandomGenSpec {
    std::size_t n_vls = 1;
    std::uint64_t seed = 0;
};

/// N point-to-point VLs behind one shared switch; bag drawn from the
/// AFDX pool, frame size uniform in [64, 1518] and constant per VL.
CsvTopology generate_random_rows(const RandomGenSpec& spec);

/// k disjoint copies of the template with VL and ES ids offset per
/// copy; copy 1 is the identity. Throws on VL id overflow.
CsvTopology replicate_rows(const CsvTopology& topo, std::uint32_t copies);

/// Converts CSV rows to VL specs. j_max defaults to the per-ES jitter
/// bound computed over all VLs sharing the source ES.
std::vector<VirtualLinkSpec> vls_from_rows(const CsvTopology& topo);

/// Rows -> single-switch topology with synthetic channel bounds for
/// any path the caller did not supply.
TopologySpec topology_from_rows(const CsvTopology& topo,
                                std::map<EsId, std::string> es_names = {},
                                std::vector<TimedChannelSpec> channels = {});

TopologySpec generate_random(const RandomGenSpec& spec);
TopologySpec replicate(const CsvTopology& topo, std::uint32_t copies);

std::string topology_to_json(const TopologySpec& topo);
/// Throws std::runtime_error with a description of the first problem.
TopologySpec topology_from_json(std::string_view text);

/// Reads a topology file: ".json" as the JSON document, anything else
/// as the CSV format (which implies the single-switch fabric and
/// synthetic default bounds).
TopologySpec load_topology_file(const std::filesystem::path& path);

std::string emit_csv_from_topology(const TopologySpec& topo);

}  // namespace afdx
