#include "afdx/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "afdx/rng.hpp"

namespace afdx {

namespace {

constexpr std::string_view kCsvHeader = "vlid,src,dst,bag,size";

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw CsvError(line_no, "unterminated quote");
    fields.push_back(current);
    return fields;
}

template <typename T>
T parse_number(const std::string& field, std::size_t line_no, const char* what) {
    T value{};
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || p != field.data() + field.size())
        throw CsvError(line_no, std::string("bad ") + what + " '" + field + "'");
    return value;
}

}  // namespace

CsvTopology parse_csv(std::string_view text, bool strict) {
    CsvTopology topo;
    std::set<VlId> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool saw_header = false;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw =
            eol == std::string_view::npos ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (raw.empty()) continue;
        if (!saw_header) {
            if (raw != kCsvHeader)
                throw CsvError(line_no, "bad header (expected '" + std::string(kCsvHeader) + "')");
            saw_header = true;
            continue;
        }
        const auto fields = split_csv_line(raw, line_no);
        if (fields.size() != 5)
            throw CsvError(line_no,
                           "expected 5 fields, got " + std::to_string(fields.size()));
        CsvRow row;
        row.vlid = parse_number<VlId>(fields[0], line_no, "vlid");
        if (!seen.insert(row.vlid).second)
            throw CsvError(line_no, "duplicate vlid " + std::to_string(row.vlid));
        row.src = parse_number<EsId>(fields[1], line_no, "src");
        for (const std::string& part : split_csv_line(fields[2], line_no)) {
            if (part.empty()) throw CsvError(line_no, "empty dst entry");
            row.dests.push_back(parse_number<EsId>(part, line_no, "dst"));
        }
        const auto bag_ms = parse_number<std::int64_t>(fields[3], line_no, "bag");
        if (bag_ms <= 0) throw CsvError(line_no, "bag must be positive");
        row.bag = bag_ms * kMs;
        const auto size = ByteSize::parse(fields[4]);
        if (!size) throw CsvError(line_no, "bad size '" + fields[4] + "'");
        row.size = *size;
        if (strict) {
            if (!is_legal_bag(row.bag))
                throw CsvError(line_no, "bag " + fields[3] + " not a power-of-two ms in 1..128");
            if (row.size < ByteSize::from_bytes(64) || row.size > ByteSize::from_bytes(1518))
                throw CsvError(line_no, "size " + fields[4] + " out of [64,1518]");
        }
        topo.rows.push_back(std::move(row));
    }
    if (!saw_header) throw CsvError(1, "empty file");
    return topo;
}

std::string emit_csv(const CsvTopology& topo) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const CsvRow& row : topo.rows) {
        out << row.vlid << ',' << row.src << ",\"";
        for (std::size_t i = 0; i < row.dests.size(); ++i) {
            if (i) out << ',';
            out << row.dests[i];
        }
        out << "\"," << row.bag / kMs << ',' << row.size.str() << '\n';
    }
    return out.str();
}

CsvTopology generate_random_rows(const RandomGenSpec& spec) {
    static constexpr std::int64_t kBagPoolMs[] = {1, 2, 4, 8, 16, 32, 64, 128};
    rng::Stream stream(
        rng::derive(spec.seed, static_cast<std::uint64_t>(rng::Purpose::Generator)));
    CsvTopology topo;
    for (std::size_t i = 1; i <= spec.n_vls; ++i) {
        CsvRow row;
        row.vlid = static_cast<VlId>(i);
        row.src = static_cast<EsId>(2 * i - 1);
        row.dests = {static_cast<EsId>(2 * i)};
        row.bag = kBagPoolMs[stream.u64_below(8)] * kMs;
        row.size = ByteSize::from_bytes(64 + static_cast<std::int64_t>(stream.u64_below(1455)));
        topo.rows.push_back(std::move(row));
    }
    return topo;
}

CsvTopology replicate_rows(const CsvTopology& topo, std::uint32_t copies) {
    if (copies < 1) throw std::invalid_argument("replicate: need at least one copy");
    VlId max_vl = 0;
    EsId max_es = 0;
    for (const CsvRow& row : topo.rows) {
        max_vl = std::max(max_vl, row.vlid);
        max_es = std::max(max_es, row.src);
        for (EsId d : row.dests) max_es = std::max(max_es, d);
    }
    const std::uint64_t top = static_cast<std::uint64_t>(max_vl) * copies;
    if (top > 65535)
        throw std::invalid_argument("replicate: vl ids overflow 16 bits (max would be " +
                                    std::to_string(top) + ")");
    CsvTopology out;
    for (std::uint32_t c = 0; c < copies; ++c) {
        for (const CsvRow& row : topo.rows) {
            CsvRow copy = row;
            copy.vlid = static_cast<VlId>(row.vlid + c * max_vl);
            copy.src = row.src + c * max_es;
            for (EsId& d : copy.dests) d += c * max_es;
            out.rows.push_back(std::move(copy));
        }
    }
    return out;
}

std::vector<VirtualLinkSpec> vls_from_rows(const CsvTopology& topo) {
    std::vector<VirtualLinkSpec> vls;
    vls.reserve(topo.rows.size());
    for (const CsvRow& row : topo.rows) {
        VirtualLinkSpec vl;
        vl.vl_id = row.vlid;
        vl.source = row.src;
        vl.destinations = row.dests;
        vl.bag = row.bag;
        vl.s_max = row.size;
        vls.push_back(std::move(vl));
    }
    // default j_max: the per-ES bound over all VLs sharing the source
    std::map<EsId, std::vector<VirtualLinkSpec>> by_source;
    for (const VirtualLinkSpec& vl : vls) by_source[vl.source].push_back(vl);
    for (VirtualLinkSpec& vl : vls)
        vl.j_max = derived_j_max_ns(by_source[vl.source]);
    return vls;
}

TopologySpec topology_from_rows(const CsvTopology& topo, std::map<EsId, std::string> es_names,
                                std::vector<TimedChannelSpec> channels) {
    TopologySpec spec =
        build_many_to_one(vls_from_rows(topo), std::move(es_names), std::move(channels));
    synthesize_missing_channels(spec);
    return spec;
}

TopologySpec generate_random(const RandomGenSpec& spec) {
    return topology_from_rows(generate_random_rows(spec));
}

TopologySpec replicate(const CsvTopology& topo, std::uint32_t copies) {
    return topology_from_rows(replicate_rows(topo, copies));
}

namespace {

double us_from_ns(Ns ns) { return static_cast<double>(ns) / 1000.0; }

Ns ns_from_us_number(const nlohmann::json& j, const char* what) {
    if (!j.is_number()) throw std::runtime_error(std::string(what) + " must be a number");
    return static_cast<Ns>(std::llround(j.get<double>() * 1000.0));
}

std::string vl_id_hex(VlId id) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%02x:%02x", id >> 8, id & 0xff);
    return buf;
}

VlId vl_id_from_hex(const std::string& text) {
    const auto mac = mac_from_string("03:00:00:00:" + text);
    if (!mac) throw std::runtime_error("bad vl_id '" + text + "' (expected hh:ll)");
    return *decode_dest_mac(*mac);
}

}  // namespace

std::string topology_to_json(const TopologySpec& topo) {
    nlohmann::ordered_json doc;
    doc["format"] = "afdx-topology";
    doc["version"] = 1;
    doc["end_systems"] = nlohmann::ordered_json::array();
    std::set<EsId> es_set;
    for (const auto& vl : topo.vls) {
        es_set.insert(vl.source);
        es_set.insert(vl.destinations.begin(), vl.destinations.end());
    }
    for (EsId es : es_set) {
        nlohmann::ordered_json j;
        j["id"] = es;
        const auto name = topo.es_names.find(es);
        if (name != topo.es_names.end()) j["name"] = name->second;
        doc["end_systems"].push_back(j);
    }
    doc["virtual_links"] = nlohmann::ordered_json::array();
    for (const auto& vl : topo.vls) {
        nlohmann::ordered_json j;
        j["vl_id"] = vl.vl_id;
        j["source"] = vl.source;
        j["destinations"] = vl.destinations;
        j["bag_ms"] = vl.bag / kMs;
        j["s_max_bytes"] = vl.s_max.as_double();
        j["j_max_us"] = us_from_ns(vl.j_max);
        doc["virtual_links"].push_back(j);
    }
    doc["switches"] = nlohmann::ordered_json::array();
    for (const auto& sw : topo.switches) {
        nlohmann::ordered_json j;
        j["id"] = sw.id;
        j["ports"] = nlohmann::ordered_json::object();
        for (const auto& [port, peer] : sw.ports) {
            nlohmann::ordered_json p;
            if (peer.kind == PortPeer::Kind::EndSystem) {
                p["es"] = peer.es;
            } else {
                p["switch"] = peer.sw;
                p["port"] = peer.sw_port;
            }
            j["ports"][std::to_string(port)] = p;
        }
        j["flow_table"] = nlohmann::ordered_json::array();
        for (const auto& entry : sw.flow_table) {
            nlohmann::ordered_json f;
            f["in_port"] = entry.in_port;
            f["vl_id"] = vl_id_hex(*decode_dest_mac(entry.match_dest_mac));
            f["actions"] = entry.out_ports;
            j["flow_table"].push_back(f);
        }
        j["policed_vls"] = sw.policed_vls;
        if (sw.tech_latency_override)
            j["tech_latency_us"] = {us_from_ns(sw.tech_latency_override->first),
                                    us_from_ns(sw.tech_latency_override->second)};
        j["output_processing_us_max"] = us_from_ns(sw.output_processing_max);
        doc["switches"].push_back(j);
    }
    doc["channels"] = nlohmann::ordered_json::array();
    for (const auto& ch : topo.channels) {
        nlohmann::ordered_json j;
        if (!ch.name.empty()) j["name"] = ch.name;
        j["vl_id"] = ch.vl_id;
        j["dest"] = ch.dest;
        if (ch.net == Net::B) j["net"] = "B";
        j["bctt_us"] = us_from_ns(ch.bctt);
        j["wctt_us"] = us_from_ns(ch.wctt);
        doc["channels"].push_back(j);
    }
    return doc.dump(2) + "\n";
}

TopologySpec topology_from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("topology json: ") + e.what());
    }
    if (doc.value("format", "") != "afdx-topology")
        throw std::runtime_error("topology json: missing format tag 'afdx-topology'");
    TopologySpec topo;
    for (const auto& j : doc.value("end_systems", nlohmann::json::array()))
        if (j.contains("name")) topo.es_names[j.at("id").get<EsId>()] = j.at("name");
    if (!doc.contains("virtual_links")) throw std::runtime_error("topology json: no virtual_links");
    for (const auto& j : doc.at("virtual_links")) {
        VirtualLinkSpec vl;
        vl.vl_id = j.at("vl_id").get<VlId>();
        vl.source = j.at("source").get<EsId>();
        vl.destinations = j.at("destinations").get<std::vector<EsId>>();
        vl.bag = j.at("bag_ms").get<std::int64_t>() * kMs;
        const auto& size = j.at("s_max_bytes");
        if (size.is_number_integer())
            vl.s_max = ByteSize::from_bytes(size.get<std::int64_t>());
        else
            vl.s_max = ByteSize::from_tenths(std::llround(size.get<double>() * 10.0));
        if (j.contains("j_max_us")) vl.j_max = ns_from_us_number(j.at("j_max_us"), "j_max_us");
        topo.vls.push_back(std::move(vl));
    }
    // VLs without an explicit override get the per-ES derived default
    std::map<EsId, std::vector<VirtualLinkSpec>> by_source;
    for (const auto& vl : topo.vls) by_source[vl.source].push_back(vl);
    for (auto& vl : topo.vls)
        if (vl.j_max == 0) vl.j_max = derived_j_max_ns(by_source[vl.source]);
    for (const auto& j : doc.value("switches", nlohmann::json::array())) {
        SwitchSpec sw;
        sw.id = j.at("id").get<std::string>();
        const nlohmann::json ports = j.value("ports", nlohmann::json::object());
        for (const auto& [key, p] : ports.items()) {
            PortId port = 0;
            auto [q, ec] = std::from_chars(key.data(), key.data() + key.size(), port);
            if (ec != std::errc{} || q != key.data() + key.size())
                throw std::runtime_error("switch " + sw.id + ": bad port '" + key + "'");
            PortPeer peer;
            if (p.contains("es")) {
                peer.kind = PortPeer::Kind::EndSystem;
                peer.es = p.at("es").get<EsId>();
            } else {
                peer.kind = PortPeer::Kind::Switch;
                peer.sw = p.at("switch").get<std::string>();
                peer.sw_port = p.at("port").get<PortId>();
            }
            sw.ports[port] = std::move(peer);
        }
        for (const auto& f : j.value("flow_table", nlohmann::json::array())) {
            FlowEntry entry;
            entry.in_port = f.at("in_port").get<PortId>();
            entry.match_dest_mac = encode_dest_mac(vl_id_from_hex(f.at("vl_id")));
            entry.out_ports = f.at("actions").get<std::vector<PortId>>();
            sw.flow_table.push_back(std::move(entry));
        }
        for (const auto& v : j.value("policed_vls", nlohmann::json::array()))
            sw.policed_vls.insert(v.get<VlId>());
        if (j.contains("tech_latency_us")) {
            const auto& t = j.at("tech_latency_us");
            sw.tech_latency_override = {ns_from_us_number(t.at(0), "tech_latency_us"),
                                        ns_from_us_number(t.at(1), "tech_latency_us")};
        }
        if (j.contains("output_processing_us_max"))
            sw.output_processing_max =
                ns_from_us_number(j.at("output_processing_us_max"), "output_processing_us_max");
        topo.switches.push_back(std::move(sw));
    }
    for (const auto& j : doc.value("channels", nlohmann::json::array())) {
        TimedChannelSpec ch;
        ch.vl_id = j.at("vl_id").get<VlId>();
        ch.dest = j.at("dest").get<EsId>();
        ch.net = j.value("net", "A") == "B" ? Net::B : Net::A;
        ch.bctt = ns_from_us_number(j.at("bctt_us"), "bctt_us");
        ch.wctt = ns_from_us_number(j.at("wctt_us"), "wctt_us");
        ch.name = j.value("name", "");
        if (const VirtualLinkSpec* vl = topo.find_vl(ch.vl_id)) ch.source = vl->source;
        topo.channels.push_back(std::move(ch));
    }
    return topo;
}

TopologySpec load_topology_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (path.extension() == ".json") return topology_from_json(text);
    return topology_from_rows(parse_csv(text, /*strict=*/false));
}

std::string emit_csv_from_topology(const TopologySpec& topo) {
    CsvTopology rows;
    for (const auto& vl : topo.vls) {
        CsvRow row;
        row.vlid = vl.vl_id;
        row.src = vl.source;
        row.dests = vl.destinations;
        row.bag = vl.bag;
        row.size = vl.s_max;
        rows.rows.push_back(std::move(row));
    }
    return emit_csv(rows);
}

}  // namespace afdx
