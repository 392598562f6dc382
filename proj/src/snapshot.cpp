#include "qmaflow/snapshot.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "qmaflow/json_format.hpp"

namespace qmaflow {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    for (int b = 0; b < 4; ++b) os.put(static_cast<char>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::ostream& os, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int b = 0; b < 8; ++b) os.put(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
    std::uint64_t v = 0;
    for (int b = bytes - 1; b >= 0; --b) v = (v << 8) | p[b];
    return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& field, const std::string& name,
                    const nlohmann::json& extra) {
    const TorusGeometry& geom = *field.geometry();
    nlohmann::json header = {{"n", geom.n()},
                             {"grid", geom.grid_shape()},
                             {"periods", geom.periods()},
                             {"name", name},
                             {"dtype", "f64"},
                             {"order", "row-major"}};
    for (auto it = extra.begin(); it != extra.end(); ++it) header[it.key()] = it.value();
    const std::string text = dump17(header);

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + path.string());
    os.write(kSnapshotMagic, sizeof kSnapshotMagic);
    put_u32(os, static_cast<std::uint32_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (double v : field.values()) put_f64(os, v);
    if (!os) throw std::runtime_error("write_snapshot: write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kSnapshotMagic, 8) != 0)
        throw std::runtime_error("read_snapshot: " + path.string() + " is not a QMAFLD01 file");
    const auto header_len = static_cast<std::size_t>(get_le(bytes.data() + 8, 4));
    if (bytes.size() < 12 + header_len) throw std::runtime_error("read_snapshot: truncated header");

    Snapshot snap;
    snap.header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<long>(header_len));
    if (snap.header.value("dtype", "") != "f64" || snap.header.value("order", "") != "row-major")
        throw std::runtime_error("read_snapshot: unsupported dtype/order");
    std::size_t expected = 1;
    for (int g : snap.header.at("grid").get<std::vector<int>>()) expected *= static_cast<std::size_t>(g);
    const std::size_t payload = bytes.size() - 12 - header_len;
    if (payload != expected * 8)
        throw std::runtime_error("read_snapshot: payload has " + std::to_string(payload) + " bytes, expected " +
                                 std::to_string(expected * 8));
    snap.values.resize(expected);
    const unsigned char* data = bytes.data() + 12 + header_len;
    for (std::size_t i = 0; i < expected; ++i) snap.values[i] = std::bit_cast<double>(get_le(data + 8 * i, 8));
    return snap;
}

ScalarField field_from_snapshot(const Snapshot& snap, const GeometryPtr& geom) {
    const int n = snap.header.at("n").get<int>();
    if (n != geom->n())
        throw std::invalid_argument("snapshot n = " + std::to_string(n) + " does not match geometry n = " +
                                    std::to_string(geom->n()));
    const auto grid = snap.header.at("grid").get<std::vector<int>>();
    if (grid != geom->grid_shape())
        throw std::invalid_argument("snapshot grid " + nlohmann::json(grid).dump() + " does not match geometry grid " +
                                    nlohmann::json(geom->grid_shape()).dump());
    const auto periods = snap.header.at("periods").get<std::vector<double>>();
    for (std::size_t d = 0; d < periods.size() && d < geom->periods().size(); ++d)
        if (std::abs(periods[d] - geom->periods()[d]) > 1e-12 * geom->periods()[d])
            throw std::invalid_argument("snapshot periods " + dump17(periods) + " do not match geometry periods " +
                                        dump17(geom->periods()));
    return ScalarField(geom, snap.values);
}

}  // namespace qmaflow
