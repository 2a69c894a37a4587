#include "opo/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace opo::io {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

struct CsvDoc {
    std::vector<std::string> comments;  ///< '#' lines with the marker stripped
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;  ///< 1-based file line of each row
};

CsvDoc parse_csv(const std::string& text) {
    CsvDoc doc;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        if (stripped[0] == '#') {
            doc.comments.push_back(trim(stripped.substr(1)));
            continue;
        }
        if (!have_header) {
            doc.header = split(stripped, ',');
            have_header = true;
        } else {
            doc.rows.push_back(split(stripped, ','));
            doc.row_lines.push_back(line_no);
        }
    }
    if (!have_header) throw std::runtime_error("csv: missing header row");
    return doc;
}

void expect_header(const CsvDoc& doc, const std::vector<std::string>& names) {
    if (doc.header != names) {
        std::string want;
        for (const auto& n : names) {
            if (!want.empty()) want += ',';
            want += n;
        }
        throw std::runtime_error("csv: expected header '" + want + "'");
    }
}

std::string comment_value(const CsvDoc& doc, const std::string& key) {
    for (const auto& c : doc.comments) {
        const auto eq = c.find('=');
        if (eq == std::string::npos) continue;
        if (trim(c.substr(0, eq)) == key) return trim(c.substr(eq + 1));
    }
    throw std::runtime_error("csv: missing metadata comment '" + key + "'");
}

std::uint64_t parse_u64(const std::string& token, const std::string& context) {
    const std::string t = trim(token);
    std::uint64_t out{};
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || p != t.data() + t.size()) {
        throw std::runtime_error(context + ": cannot parse integer '" + token + "'");
    }
    return out;
}

Eigen::ArrayXd column(const CsvDoc& doc, std::size_t idx, const std::string& name) {
    Eigen::ArrayXd out(static_cast<Eigen::Index>(doc.rows.size()));
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        if (idx >= doc.rows[r].size()) {
            throw std::runtime_error("csv line " + std::to_string(doc.row_lines[r]) +
                                     ": missing column '" + name + "'");
        }
        out[static_cast<Eigen::Index>(r)] =
            parse_double(doc.rows[r][idx],
                         "csv line " + std::to_string(doc.row_lines[r]) + ", column " + name);
    }
    return out;
}

std::vector<double> to_vector(const Eigen::ArrayXd& a) {
    return {a.data(), a.data() + a.size()};
}

Eigen::ArrayXd from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// JSON array where NaN entries become `token` strings.
nlohmann::json tokened_array(const Eigen::ArrayXd& a, const char* token) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        if (std::isnan(a[k])) {
            arr.push_back(token);
        } else {
            arr.push_back(a[k]);
        }
    }
    return arr;
}

Eigen::ArrayXd tokened_from_json(const nlohmann::json& arr, const char* token,
                                 const std::string& context) {
    if (!arr.is_array()) throw std::runtime_error(context + ": expected an array");
    Eigen::ArrayXd out(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index k = 0;
    for (const auto& el : arr) {
        if (el.is_string()) {
            if (el.get<std::string>() != token) {
                throw std::runtime_error(context + ": unexpected token '" +
                                         el.get<std::string>() + "'");
            }
            out[k++] = kNan;
        } else if (el.is_number()) {
            out[k++] = el.get<double>();
        } else {
            throw std::runtime_error(context + ": expected number or token");
        }
    }
    return out;
}

const nlohmann::json& key(const nlohmann::json& j, const char* name,
                          const std::string& context) {
    if (!j.contains(name)) {
        throw std::runtime_error(context + ": missing key '" + name + "'");
    }
    return j.at(name);
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return kDivergentToken;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", value);
    return buf;
}

double parse_double(const std::string& token, const std::string& context) {
    const std::string t = trim(token);
    if (t == kDivergentToken) return kNan;
    double out{};
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || p != t.data() + t.size()) {
        throw std::runtime_error(context + ": cannot parse number '" + token + "'");
    }
    return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::remove(tmp.c_str());
            throw std::runtime_error("write failed for '" + tmp + "'");
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "'");
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string sweep_to_csv(const SweepTrace& trace) {
    std::string out;
    for (const auto& m : trace.channel_markers) {
        out += "# channel center_hz=" + format_double(m.center) +
               " sigma=" + format_double(m.sigma) + "\n";
    }
    out += "detuning,snl,noise_diff,noise_sum,noise_single,pump_transmission\n";
    for (Eigen::Index k = 0; k < trace.detuning.size(); ++k) {
        out += format_double(trace.detuning[k]) + ',' + format_double(trace.snl[k]) + ',' +
               format_double(trace.noise_diff[k]) + ',' + format_double(trace.noise_sum[k]) +
               ',' + format_double(trace.noise_single[k]) + ',' +
               format_double(trace.pump_transmission[k]) + '\n';
    }
    return out;
}

SweepTrace sweep_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text);
    expect_header(doc, {"detuning", "snl", "noise_diff", "noise_sum", "noise_single",
                        "pump_transmission"});
    SweepTrace trace;
    trace.detuning = column(doc, 0, "detuning");
    trace.snl = column(doc, 1, "snl");
    trace.noise_diff = column(doc, 2, "noise_diff");
    trace.noise_sum = column(doc, 3, "noise_sum");
    trace.noise_single = column(doc, 4, "noise_single");
    trace.pump_transmission = column(doc, 5, "pump_transmission");
    for (const auto& c : doc.comments) {
        if (c.rfind("channel ", 0) != 0) continue;
        const auto parts = split(c.substr(8), ' ');
        ChannelMarker marker{};
        bool have_center = false;
        bool have_sigma = false;
        for (const auto& part : parts) {
            const auto eq = part.find('=');
            if (eq == std::string::npos) continue;
            const std::string k = part.substr(0, eq);
            const std::string v = part.substr(eq + 1);
            if (k == "center_hz") {
                marker.center = parse_double(v, "sweep csv channel center");
                have_center = true;
            } else if (k == "sigma") {
                marker.sigma = parse_double(v, "sweep csv channel sigma");
                have_sigma = true;
            }
        }
        if (!have_center || !have_sigma) {
            throw std::runtime_error("sweep csv: malformed channel comment '" + c + "'");
        }
        trace.channel_markers.push_back(marker);
    }
    return trace;
}

nlohmann::json sweep_to_json(const SweepTrace& trace) {
    nlohmann::json j;
    j["detuning_hz"] = to_vector(trace.detuning);
    j["snl_snu"] = to_vector(trace.snl);
    j["noise_diff_snu"] = to_vector(trace.noise_diff);
    j["noise_sum_snu"] = to_vector(trace.noise_sum);
    j["noise_single_snu"] = to_vector(trace.noise_single);
    j["pump_transmission"] = to_vector(trace.pump_transmission);
    nlohmann::json markers = nlohmann::json::array();
    for (const auto& m : trace.channel_markers) {
        markers.push_back({{"center_hz", m.center}, {"sigma", m.sigma}});
    }
    j["channel_markers"] = markers;
    return j;
}

SweepTrace sweep_from_json(const nlohmann::json& j) {
    SweepTrace trace;
    const std::string ctx = "sweep json";
    trace.detuning = from_vector(key(j, "detuning_hz", ctx).get<std::vector<double>>());
    trace.snl = from_vector(key(j, "snl_snu", ctx).get<std::vector<double>>());
    trace.noise_diff = from_vector(key(j, "noise_diff_snu", ctx).get<std::vector<double>>());
    trace.noise_sum = from_vector(key(j, "noise_sum_snu", ctx).get<std::vector<double>>());
    trace.noise_single =
        from_vector(key(j, "noise_single_snu", ctx).get<std::vector<double>>());
    trace.pump_transmission =
        from_vector(key(j, "pump_transmission", ctx).get<std::vector<double>>());
    for (const auto& m : key(j, "channel_markers", ctx)) {
        trace.channel_markers.push_back(
            {key(m, "center_hz", ctx).get<double>(), key(m, "sigma", ctx).get<double>()});
    }
    return trace;
}

std::string pair_to_csv(const PhotocurrentPair& pair) {
    std::string out;
    out += "# sample_rate_hz=" + format_double(pair.sample_rate) + "\n";
    out += "# duration_s=" + format_double(pair.duration) + "\n";
    out += "# seed=" + std::to_string(pair.seed) + "\n";
    out += "time_s,signal,idler\n";
    for (Eigen::Index k = 0; k < pair.signal_trace.size(); ++k) {
        out += format_double(static_cast<double>(k) / pair.sample_rate) + ',' +
               format_double(pair.signal_trace[k]) + ',' +
               format_double(pair.idler_trace[k]) + '\n';
    }
    return out;
}

PhotocurrentPair pair_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text);
    expect_header(doc, {"time_s", "signal", "idler"});
    PhotocurrentPair pair;
    pair.sample_rate = parse_double(comment_value(doc, "sample_rate_hz"), "pair csv sample_rate");
    pair.duration = parse_double(comment_value(doc, "duration_s"), "pair csv duration");
    pair.seed = parse_u64(comment_value(doc, "seed"), "pair csv seed");
    pair.signal_trace = column(doc, 1, "signal");
    pair.idler_trace = column(doc, 2, "idler");
    return pair;
}

nlohmann::json pair_to_json(const PhotocurrentPair& pair) {
    nlohmann::json j;
    j["sample_rate_hz"] = pair.sample_rate;
    j["duration_s"] = pair.duration;
    j["seed"] = pair.seed;
    j["signal"] = to_vector(pair.signal_trace);
    j["idler"] = to_vector(pair.idler_trace);
    return j;
}

PhotocurrentPair pair_from_json(const nlohmann::json& j) {
    const std::string ctx = "pair json";
    PhotocurrentPair pair;
    pair.sample_rate = key(j, "sample_rate_hz", ctx).get<double>();
    pair.duration = key(j, "duration_s", ctx).get<double>();
    pair.seed = key(j, "seed", ctx).get<std::uint64_t>();
    pair.signal_trace = from_vector(key(j, "signal", ctx).get<std::vector<double>>());
    pair.idler_trace = from_vector(key(j, "idler", ctx).get<std::vector<double>>());
    return pair;
}

namespace {

Eigen::ArrayXd snu_to_db(const Eigen::ArrayXd& snu) {
    Eigen::ArrayXd db(snu.size());
    for (Eigen::Index k = 0; k < snu.size(); ++k) {
        db[k] = std::isnan(snu[k]) ? kNan : 10.0 * std::log10(snu[k]);
    }
    return db;
}

}  // namespace

std::string variance_to_csv(const VarianceTable& table) {
    std::string out = table.grid_name +
                      ",noise_diff_snu,noise_sum_snu,noise_single_snu,"
                      "noise_diff_db,noise_sum_db,noise_single_db\n";
    const Eigen::ArrayXd diff_db = snu_to_db(table.noise_diff);
    const Eigen::ArrayXd sum_db = snu_to_db(table.noise_sum);
    const Eigen::ArrayXd single_db = snu_to_db(table.noise_single);
    for (Eigen::Index k = 0; k < table.grid.size(); ++k) {
        out += format_double(table.grid[k]) + ',' + format_double(table.noise_diff[k]) + ',' +
               format_double(table.noise_sum[k]) + ',' + format_double(table.noise_single[k]) +
               ',' + format_double(diff_db[k]) + ',' + format_double(sum_db[k]) + ',' +
               format_double(single_db[k]) + '\n';
    }
    return out;
}

VarianceTable variance_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text);
    if (doc.header.size() != 7 || doc.header[1] != "noise_diff_snu") {
        throw std::runtime_error("variance csv: unexpected header");
    }
    VarianceTable table;
    table.grid_name = doc.header[0];
    table.grid = column(doc, 0, table.grid_name);
    table.noise_diff = column(doc, 1, "noise_diff_snu");
    table.noise_sum = column(doc, 2, "noise_sum_snu");
    table.noise_single = column(doc, 3, "noise_single_snu");
    return table;
}

nlohmann::json variance_to_json(const VarianceTable& table) {
    nlohmann::json j;
    j["grid_name"] = table.grid_name;
    j["grid"] = to_vector(table.grid);
    j["noise_diff_snu"] = tokened_array(table.noise_diff, kDivergentToken);
    j["noise_sum_snu"] = tokened_array(table.noise_sum, kDivergentToken);
    j["noise_single_snu"] = tokened_array(table.noise_single, kDivergentToken);
    j["noise_diff_db"] = tokened_array(snu_to_db(table.noise_diff), kDivergentToken);
    j["noise_sum_db"] = tokened_array(snu_to_db(table.noise_sum), kDivergentToken);
    j["noise_single_db"] = tokened_array(snu_to_db(table.noise_single), kDivergentToken);
    return j;
}

VarianceTable variance_from_json(const nlohmann::json& j) {
    const std::string ctx = "variance json";
    VarianceTable table;
    table.grid_name = key(j, "grid_name", ctx).get<std::string>();
    table.grid = from_vector(key(j, "grid", ctx).get<std::vector<double>>());
    table.noise_diff = tokened_from_json(key(j, "noise_diff_snu", ctx), kDivergentToken, ctx);
    table.noise_sum = tokened_from_json(key(j, "noise_sum_snu", ctx), kDivergentToken, ctx);
    table.noise_single =
        tokened_from_json(key(j, "noise_single_snu", ctx), kDivergentToken, ctx);
    return table;
}

std::string relax_to_csv(const RelaxTable& table) {
    std::string out;
    out += "# sigma_threshold=" + format_double(table.sigma_threshold) + "\n";
    out += "# window_low=" + format_double(table.window_low) + "\n";
    out += "# window_high=" + format_double(table.window_high) + "\n";
    out += "sigma,nu_n\n";
    for (Eigen::Index k = 0; k < table.sigma.size(); ++k) {
        out += format_double(table.sigma[k]) + ',';
        out += std::isnan(table.nu_n[k]) ? std::string(kBelowThresholdToken)
                                         : format_double(table.nu_n[k]);
        out += '\n';
    }
    return out;
}

RelaxTable relax_from_csv(const std::string& text) {
    const CsvDoc doc = parse_csv(text);
    expect_header(doc, {"sigma", "nu_n"});
    RelaxTable table;
    table.sigma_threshold =
        parse_double(comment_value(doc, "sigma_threshold"), "relax csv sigma_threshold");
    table.window_low = parse_double(comment_value(doc, "window_low"), "relax csv window_low");
    table.window_high = parse_double(comment_value(doc, "window_high"), "relax csv window_high");
    table.sigma = column(doc, 0, "sigma");
    table.nu_n.resize(static_cast<Eigen::Index>(doc.rows.size()));
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        if (doc.rows[r].size() < 2) {
            throw std::runtime_error("csv line " + std::to_string(doc.row_lines[r]) +
                                     ": missing column 'nu_n'");
        }
        const std::string& cell = doc.rows[r][1];
        table.nu_n[static_cast<Eigen::Index>(r)] =
            cell == kBelowThresholdToken
                ? kNan
                : parse_double(cell, "csv line " + std::to_string(doc.row_lines[r]) +
                                         ", column nu_n");
    }
    return table;
}

nlohmann::json relax_to_json(const RelaxTable& table) {
    nlohmann::json j;
    j["sigma_threshold"] = table.sigma_threshold;
    j["window_low"] = table.window_low;
    j["window_high"] = table.window_high;
    j["sigma"] = to_vector(table.sigma);
    j["nu_n"] = tokened_array(table.nu_n, kBelowThresholdToken);
    return j;
}

RelaxTable relax_from_json(const nlohmann::json& j) {
    const std::string ctx = "relax json";
    RelaxTable table;
    table.sigma_threshold = key(j, "sigma_threshold", ctx).get<double>();
    table.window_low = key(j, "window_low", ctx).get<double>();
    table.window_high = key(j, "window_high", ctx).get<double>();
    table.sigma = from_vector(key(j, "sigma", ctx).get<std::vector<double>>());
    table.nu_n = tokened_from_json(key(j, "nu_n", ctx), kBelowThresholdToken, ctx);
    return table;
}

std::vector<FitPoint> load_fit_data(const std::string& text) {
    const CsvDoc doc = parse_csv(text);
    if (doc.header.size() < 2 || doc.header.size() > 3 || doc.header[0] != "power_uW" ||
        doc.header[1] != "variance_snu" ||
        (doc.header.size() == 3 && doc.header[2] != "weight")) {
        throw std::runtime_error("fit data: header must be 'power_uW,variance_snu[,weight]'");
    }
    const bool with_weights = doc.header.size() == 3;
    std::vector<FitPoint> data;
    data.reserve(doc.rows.size());
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const std::string line_ctx = "fit data line " + std::to_string(doc.row_lines[r]);
        if (doc.rows[r].size() != doc.header.size()) {
            throw std::runtime_error(line_ctx + ": expected " +
                                     std::to_string(doc.header.size()) + " columns, got " +
                                     std::to_string(doc.rows[r].size()));
        }
        FitPoint pt;
        pt.power = parse_double(doc.rows[r][0], line_ctx + ", column power_uW");
        pt.variance = parse_double(doc.rows[r][1], line_ctx + ", column variance_snu");
        pt.weight = with_weights
                        ? parse_double(doc.rows[r][2], line_ctx + ", column weight")
                        : 1.0;
        data.push_back(pt);
    }
    return data;
}

std::string fit_data_to_csv(const std::vector<FitPoint>& data, bool with_weights) {
    std::string out = with_weights ? "power_uW,variance_snu,weight\n"
                                   : "power_uW,variance_snu\n";
    for (const auto& pt : data) {
        out += format_double(pt.power) + ',' + format_double(pt.variance);
        if (with_weights) out += ',' + format_double(pt.weight);
        out += '\n';
    }
    return out;
}

namespace {

std::pair<std::vector<double>, std::vector<double>> fitted_curve(
    const FitResult& result, double omega, const std::vector<FitPoint>& data,
    int curve_points) {
    double p_min = std::numeric_limits<double>::infinity();
    double p_max = 0.0;
    for (const auto& pt : data) {
        p_min = std::min(p_min, pt.power);
        p_max = std::max(p_max, pt.power);
    }
    std::vector<double> powers(static_cast<std::size_t>(curve_points));
    std::vector<double> values(static_cast<std::size_t>(curve_points));
    for (int k = 0; k < curve_points; ++k) {
        const double t = curve_points == 1 ? 0.0
                                           : static_cast<double>(k) / (curve_points - 1);
        powers[static_cast<std::size_t>(k)] = p_min + t * (p_max - p_min);
        values[static_cast<std::size_t>(k)] = single_beam_model(
            powers[static_cast<std::size_t>(k)], result.p_th_hat, result.scale_hat, omega);
    }
    return {powers, values};
}

}  // namespace

nlohmann::json fit_result_to_json(const FitResult& result, double omega,
                                  const std::vector<FitPoint>& data, int curve_points) {
    nlohmann::json j;
    j["p_th_uW"] = result.p_th_hat;
    j["p_th_uncertainty_uW"] = result.p_th_uncertainty;
    j["scale"] = result.scale_hat;
    j["scale_uncertainty"] = result.scale_uncertainty;
    j["asymptote_snu"] = result.asymptote_hat;
    j["asymptote_uncertainty_snu"] = result.asymptote_uncertainty;
    j["residual_rms_snu"] = result.residual_rms;
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["omega"] = omega;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& pt : data) {
        points.push_back({{"power_uW", pt.power},
                          {"variance_snu", pt.variance},
                          {"weight", pt.weight}});
    }
    j["data"] = points;
    const auto [powers, values] = fitted_curve(result, omega, data, curve_points);
    j["curve"] = {{"power_uW", powers}, {"variance_snu", values}};
    return j;
}

std::string fit_curve_to_csv(const FitResult& result, double omega,
                             const std::vector<FitPoint>& data, int curve_points) {
    const auto [powers, values] = fitted_curve(result, omega, data, curve_points);
    std::string out = "power_uW,variance_snu\n";
    for (std::size_t k = 0; k < powers.size(); ++k) {
        out += format_double(powers[k]) + ',' + format_double(values[k]) + '\n';
    }
    return out;
}

namespace {

const nlohmann::json& section(const nlohmann::json& j, const char* name) {
    if (!j.contains(name)) {
        throw std::runtime_error(std::string("params: missing section '") + name + "'");
    }
    return j.at(name);
}

double num(const nlohmann::json& sec, const std::string& sec_name, const char* name) {
    if (!sec.contains(name) || !sec.at(name).is_number()) {
        throw std::runtime_error("params: missing numeric '" + sec_name + "." + name + "'");
    }
    return sec.at(name).get<double>();
}

SweepPreset load_preset(const nlohmann::json& sec, const std::string& sec_name) {
    SweepPreset preset;
    preset.coupling_ratio = num(sec, sec_name, "coupling_ratio");
    preset.eta = num(sec, sec_name, "eta");
    preset.config.span = num(sec, sec_name, "span_mhz") * 1e6;
    preset.config.points = static_cast<int>(num(sec, sec_name, "points"));
    preset.config.sweep_time = num(sec, sec_name, "sweep_time_ms") * 1e-3;
    preset.config.jitter = sec.contains("jitter") ? num(sec, sec_name, "jitter") : 0.0;
    if (!sec.contains("channels") || !sec.at("channels").is_array()) {
        throw std::runtime_error("params: missing array '" + sec_name + ".channels'");
    }
    for (const auto& ch : sec.at("channels")) {
        preset.config.channels.push_back({num(ch, sec_name + ".channels", "center_mhz") * 1e6,
                                          num(ch, sec_name + ".channels", "sigma"),
                                          num(ch, sec_name + ".channels", "width_mhz") * 1e6});
    }
    return preset;
}

}  // namespace

CavityParams Params::cavity() const {
    return CavityParams::from_coupling_ratio(gamma_p, gamma_p0, gamma, coupling_ratio);
}

CavityParams Params::cavity_with_ratio(double ratio) const {
    return CavityParams::from_coupling_ratio(gamma_p, gamma_p0, gamma, ratio);
}

DetectionChain Params::chain(double eta) const {
    return DetectionChain::create(eta, cmrr_imbalance, electronic_floor, rbw, vbw,
                                  avg_count, nu_center);
}

Params load_params(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("params '" + path + "': " + e.what());
    }

    Params p{};
    const auto& cav = section(j, "cavity");
    p.gamma_p = num(cav, "cavity", "gamma_p_mhz") * 1e6;
    p.gamma_p0 = num(cav, "cavity", "gamma_p0_mhz") * 1e6;
    p.gamma = num(cav, "cavity", "gamma_mhz") * 1e6;
    p.coupling_ratio = num(cav, "cavity", "coupling_ratio");

    const auto& op = section(j, "operating");
    p.nu_det = num(op, "operating", "nu_det_mhz") * 1e6;
    if (!op.contains("p_th_uw_options") || !op.at("p_th_uw_options").is_array()) {
        throw std::runtime_error("params: missing array 'operating.p_th_uw_options'");
    }
    for (const auto& el : op.at("p_th_uw_options")) {
        p.p_th_options.push_back(el.get<double>() * 1e-6);
    }

    const auto& det = section(j, "detection");
    p.eta_twin = num(det, "detection", "eta_twin");
    p.eta_single = num(det, "detection", "eta_single");
    p.cmrr_imbalance = num(det, "detection", "cmrr_imbalance");
    p.electronic_floor = num(det, "detection", "electronic_floor_snu");
    p.rbw = num(det, "detection", "rbw_khz") * 1e3;
    p.vbw = num(det, "detection", "vbw_khz") * 1e3;
    p.avg_count = static_cast<int>(num(det, "detection", "avg_count"));
    p.nu_center = num(det, "detection", "nu_center_mhz") * 1e6;

    p.sweep_twin = load_preset(section(j, "sweep_twin"), "sweep_twin");
    p.sweep_single = load_preset(section(j, "sweep_single"), "sweep_single");
    return p;
}

}  // namespace opo::io
