#include <cmath>
#include <cstdio>
#include <fstream>

#include "med/error.hpp"
#include "med/fit.hpp"

namespace med {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "iteration,loss,psnr,ssim\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iteration);
    out += ',';
    out += format_number(r.loss);
    out += ',';
    if (r.psnr) out += format_number(*r.psnr);
    out += ',';
    if (r.ssim) out += format_number(*r.ssim);
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace med
