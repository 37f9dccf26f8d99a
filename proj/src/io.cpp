#include "cmf/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cmf {

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return out;
}

} // namespace

TraceRow make_row(int iter, const EnergyReport& e, double change, double wall_ms) {
    return {iter, e.fidelity, e.perimeter, e.total, e.volume, e.multiplier, change, std::llround(wall_ms)};
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows) {
    auto out = open_out(path);
    out << trace_header << '\n' << std::setprecision(17);
    for (const auto& r : rows)
        out << r.iter << ',' << r.fidelity << ',' << r.perimeter << ',' << r.total << ',' << r.volume << ','
            << r.multiplier << ',' << r.phi_change_l2 << ',' << r.wall_ms << '\n';
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != trace_header) throw ConfigError("'" + path + "' lacks the trace header");
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream s(line);
        TraceRow r;
        if (!(s >> r.iter >> r.fidelity >> r.perimeter >> r.total >> r.volume >> r.multiplier >> r.phi_change_l2 >>
              r.wall_ms))
            throw ConfigError("malformed trace row in '" + path + "'");
        rows.push_back(r);
    }
    return rows;
}

void write_pgm(const std::string& path, const ScalarField2D& f, double peak) {
    auto out = open_out(path, true);
    out << "P5\n" << f.nx() << ' ' << f.ny() << "\n255\n";
    std::vector<unsigned char> row(static_cast<std::size_t>(f.nx()));
    for (int iy = f.ny() - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < f.nx(); ++ix)
            row[ix] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(f(ix, iy) / peak, 0.0, 1.0)));
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
}

ScalarField2D read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255) throw ConfigError("'" + path + "' is not an 8-bit P5 image");
    in.get();
    ScalarField2D f(Grid2D(w, h, 1.0 / w));
    std::vector<unsigned char> row(static_cast<std::size_t>(w));
    for (int iy = h - 1; iy >= 0; --iy) {
        if (!in.read(reinterpret_cast<char*>(row.data()), w)) throw ConfigError("'" + path + "' is truncated");
        for (int ix = 0; ix < w; ++ix) f(ix, iy) = row[ix] / 255.0;
    }
    return f;
}

std::vector<std::size_t> histogram(const ScalarField2D& f, int bins) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : f.values()) {
        const int b = std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
        ++counts[b];
    }
    return counts;
}

void write_histogram_csv(const std::string& path, const ScalarField2D& f, int bins) {
    const auto counts = histogram(f, bins);
    auto out = open_out(path);
    out << "bin,lower,upper,count,fraction\n" << std::setprecision(17);
    for (int b = 0; b < bins; ++b)
        out << b << ',' << static_cast<double>(b) / bins << ',' << static_cast<double>(b + 1) / bins << ','
            << counts[b] << ',' << static_cast<double>(counts[b]) / static_cast<double>(f.size()) << '\n';
}

void write_manifest(const std::string& path, const ConfigMap& resolved) {
    auto out = open_out(path);
    for (const auto& [k, v] : resolved) out << k << " = " << v << '\n';
}

void write_text(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

} // namespace cmf
