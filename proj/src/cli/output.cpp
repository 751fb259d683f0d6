#include "nuelab/cli/runner.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nuelab::cli {
namespace {

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
}

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string git_blob_sha1(std::string_view content) {
  const std::string header = fmt::format("blob {}", content.size());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) &&
                  EVP_DigestUpdate(ctx, header.data(), header.size() + 1) &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) && EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericError("SHA-1 digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string rate_chart_svg(const std::vector<FractionEstimate>& series, std::optional<double> reference,
                           const std::string& title) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& f : series)
    if (f.p_hat > 0.0) pts.push_back({static_cast<double>(f.n), -std::log(f.p_hat) / static_cast<double>(f.n)});

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts.front().first;
    y0 = y1 = pts.front().second;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (reference) y0 = std::min(y0, *reference), y1 = std::max(y1, *reference);
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  auto px = [&](double x) { return L + (W - L - R) * (x - x0) / (x1 - x0); };
  auto py = [&](double y) { return H - B - (H - T - B) * (y - y0) / (y1 - y0); };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      W, H, W, H);
  s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
  s += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", W / 2,
                   svg_escape(title));
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", L, H - B, W - R);
  s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", L, T, H - B);
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", px(xv), H - B + 18, xv);
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", L - 6, py(yv) + 4, yv);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">n</text>\n", (L + W - R) / 2, H - 12);
  s += fmt::format("<text x=\"16\" y=\"{0}\" transform=\"rotate(-90 16 {0})\" text-anchor=\"middle\">-(1/n) log p</text>\n",
                   (T + H - B) / 2);
  if (reference)
    s += fmt::format("<line x1=\"{0}\" y1=\"{1:.1f}\" x2=\"{2}\" y2=\"{1:.1f}\" stroke=\"firebrick\" stroke-dasharray=\"6 4\"/>\n",
                     L, py(*reference), W - R);
  if (!pts.empty()) {
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) s += fmt::format("{:.1f},{:.1f} ", px(x), py(y));
    s += "\"/>\n";
    for (const auto& [x, y] : pts)
      s += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"steelblue\"/>\n", px(x), py(y));
  }
  s += "</svg>\n";
  return s;
}

void write_bundle(const Bundle& bundle, const OutputConfig& output) {
  const std::filesystem::path dir(output.directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  // The summary references results.csv by hash, so the CSV is always written.
  write_file(dir / "results.csv", bundle.results_csv);
  if (output.wants("json")) write_file(dir / "summary.json", bundle.summary.dump(2) + "\n");
  if (output.wants("svg") && bundle.chart_svg) write_file(dir / "rate.svg", *bundle.chart_svg);
}

std::string report_csv(const std::vector<std::filesystem::path>& bundles) {
  if (bundles.empty()) throw ConfigError("report needs at least one bundle");
  std::vector<Json> summaries;
  for (const auto& path : bundles) {
    const auto file = std::filesystem::is_directory(path) ? path / "summary.json" : path;
    std::ifstream in(file);
    if (!in) throw ConfigError(fmt::format("cannot read '{}'", file.string()));
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigError(fmt::format("{}: {}", file.string(), e.what()));
    }
    if (!j.contains("schema") || j["schema"] != kSummarySchema)
      throw ConfigError(fmt::format("{}: incompatible summary schema", file.string()));
    summaries.push_back(std::move(j));
  }

  // Variational bounds from `bound` bundles, keyed by c.
  std::vector<std::pair<double, double>> bounds;
  for (const auto& j : summaries)
    if (j["experiment"] == "bound")
      for (const auto& v : j["statistics"]["values"]) bounds.push_back({v["c"].get<double>(), v["rate_bound"].get<double>()});
  auto bound_at = [&](double c) -> std::optional<double> {
    for (const auto& [bc, v] : bounds)
      if (std::abs(bc - c) < 1e-12) return v;
    return std::nullopt;
  };
  auto fmt_opt = [](std::optional<double> v) { return v ? fmt::format("{:.17g}", *v) : std::string(); };

  std::string out =
      "bundle,experiment,family,c [observable],xi_empirical [1/iterate],xi_std_error [1/iterate],"
      "rate_bound [nats/iterate],gap [1/iterate]\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const Json& j = summaries[i];
    const std::string kind = j["experiment"].get<std::string>();
    const Json& cfg = j["config"];
    const std::string family = cfg["system"]["family"].get<std::string>();
    const std::string name = bundles[i].filename().empty() ? bundles[i].parent_path().filename().string()
                                                           : bundles[i].filename().string();
    if (kind == "bound") {
      for (const auto& v : j["statistics"]["values"])
        out += fmt::format("{},{},{},{:.17g},,,{:.17g},\n", name, kind, family, v["c"].get<double>(),
                           v["rate_bound"].get<double>());
      continue;
    }
    std::optional<double> c, xi, se, rb;
    if (cfg[kind].contains("c") && cfg[kind]["c"].is_number()) c = cfg[kind]["c"].get<double>();
    if (j["fit"].is_object() && j["fit"].contains("xi")) {
      xi = j["fit"]["xi"].get<double>();
      se = j["fit"]["std_error"].get<double>();
    }
    if (c) rb = bound_at(*c);
    if (!rb && j["oracle"].contains("rate_bound")) rb = j["oracle"]["rate_bound"].get<double>();
    std::optional<double> gap;
    if (xi && rb) gap = *xi + *rb;
    out += fmt::format("{},{},{},{},{},{},{},{}\n", name, kind, family, fmt_opt(c), fmt_opt(xi), fmt_opt(se),
                       fmt_opt(rb), fmt_opt(gap));
  }
  return out;
}

}  // namespace nuelab::cli
