#pragma once

#include "cmf/config.hpp"
#include "cmf/energy.hpp"
#include "cmf/field.hpp"

#include <array>
#include <string>
#include <vector>

namespace cmf {

struct TraceRow {
    int iter = 0;
    double fidelity = 0.0;
    double perimeter = 0.0;
    double total = 0.0;
    double volume = 0.0;
    double multiplier = 0.0;
    double phi_change_l2 = 0.0;
    long long wall_ms = 0;
};

inline constexpr const char* trace_header = "iter,fidelity,perimeter,total,volume,multiplier,phi_change_l2,wall_ms";

TraceRow make_row(int iter, const EnergyReport& e, double change, double wall_ms);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Binary P5, maxval 255, value v in [0, peak] stored as round(255 v / peak).
/// Row 0 of the image is the top of the domain (largest y).
void write_pgm(const std::string& path, const ScalarField2D& f, double peak = 1.0);
ScalarField2D read_pgm(const std::string& path);

std::vector<std::size_t> histogram(const ScalarField2D& f, int bins = 64);
void write_histogram_csv(const std::string& path, const ScalarField2D& f, int bins = 64);

void write_manifest(const std::string& path, const ConfigMap& resolved);

void write_text(const std::string& path, const std::string& text);

} // namespace cmf
