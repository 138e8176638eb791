#pragma once

// CSV forms of fields, traces, click records and correlation estimates.
//
// Every file starts with two comment lines, e.g.
//   # phbt envelope v1
//   # dt=2.5e-07 t0=0 spec_hash=0x1f2e...
// followed by a column header and one row per sample. Raw values are written
// with 17 significant digits so a read-back is exact.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "phbt/detection.hpp"
#include "phbt/field_engine.hpp"

namespace phbt::io {

// 17 significant digits, shortest round-trippable form not required.
std::string exact(double v);
// 10 significant digits for derived quantities.
std::string compact(double v);

void write_csv(std::ostream& os, const ComplexEnvelope& env);
void write_csv(std::ostream& os, const PulseTrain& train);
void write_csv(std::ostream& os, const PhotocurrentTrace& trace);
void write_csv(std::ostream& os, const ClickRecord& clicks);
// tau_column is "tau" for analog correlators and "dN" for click correlators.
void write_csv(std::ostream& os, const CorrelationEstimate& est,
               std::string_view tau_column = "tau");

ComplexEnvelope read_envelope_csv(std::istream& is);
PulseTrain read_pulse_train_csv(std::istream& is);
PhotocurrentTrace read_trace_csv(std::istream& is);
ClickRecord read_click_csv(std::istream& is);
CorrelationEstimate read_correlation_csv(std::istream& is);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace phbt::io
