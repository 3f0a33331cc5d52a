#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "maass/cli.hpp"
#include "maass/errors.hpp"

namespace maass::cli {

namespace fs = std::filesystem;

namespace {

double parse_double(const std::string& key, const std::string& text) {
    double v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
        throw ConfigError("setting '" + key + "': not a number: '" + text + "'");
    }
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) throw ConfigError("setting '" + key + "': not an integer: '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError("setting '" + key + "': expected true or false");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

// finite numbers as JSON numbers, anything else as a decimal string
json real(double x) {
    if (std::isfinite(x)) return x;
    return format_real(x);
}

double real_from(const json& j) {
    if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
    return j.get<double>();
}

std::vector<double> reals(const json& j) {
    std::vector<double> v;
    for (const auto& x : j) v.push_back(real_from(x));
    return v;
}

json real_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(real(x));
    return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::pair<double, double> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("range must be LO:HI, got '" + text + "'");
    const double lo = parse_double("r", trim(text.substr(0, colon)));
    const double hi = parse_double("r", trim(text.substr(colon + 1)));
    if (lo < 0 || hi < lo) throw ConfigError("range needs 0 <= LO <= HI, got '" + text + "'");
    return {lo, hi};
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    auto positive = [&](double v) {
        if (!(v > 0)) throw ConfigError("setting '" + key + "' must be positive");
        return v;
    };
    if (key == "level") {
        cfg.level = parse_int(key, value);
        if (cfg.level < 1) throw ConfigError("level must be at least 1");
    } else if (key == "sym") {
        cfg.sym = value;
    } else if (key == "r") {
        std::tie(cfg.r_lo, cfg.r_hi) = parse_range(value);
        cfg.r_given = true;
    } else if (key == "eps") {
        cfg.trunc_eps = positive(parse_double(key, value));
        if (cfg.trunc_eps > 1e-3) throw ConfigError("eps must be at most 1e-3");
    } else if (key == "tol") {
        cfg.tol = positive(parse_double(key, value));
    } else if (key == "n_points") {
        cfg.n_points = static_cast<int>(parse_int(key, value));
        if (cfg.n_points < 0) throw ConfigError("n_points must be >= 0");
    } else if (key == "y0") {
        cfg.y0 = parse_double(key, value);
        if (cfg.y0 < 0) throw ConfigError("y0 must be >= 0");
    } else if (key == "oldforms") {
        cfg.oldforms = parse_bool(key, value);
    } else if (key == "delta") {
        cfg.delta = parse_double(key, value);
        if (cfg.delta < 0) throw ConfigError("delta must be >= 0");
    } else if (key == "tmax") {
        cfg.t_max = positive(parse_double(key, value));
    } else if (key == "grid_step") {
        cfg.grid_step = positive(parse_double(key, value));
    } else if (key == "firstzero_r_min") {
        cfg.firstzero_r_min = parse_double(key, value);
    } else if (key == "zerospacing_r_min") {
        cfg.zerospacing_r_min = parse_double(key, value);
    } else if (key == "zero_start") {
        cfg.zero_start = static_cast<int>(parse_int(key, value));
        if (cfg.zero_start < 1) throw ConfigError("zero_start must be >= 1");
    } else if (key == "critval_skip") {
        cfg.critval_skip = static_cast<int>(parse_int(key, value));
    } else if (key == "window") {
        cfg.window = static_cast<int>(parse_int(key, value));
    } else if (key == "audit_threshold") {
        cfg.audit_threshold = positive(parse_double(key, value));
    } else if (key == "rmt_dim") {
        cfg.rmt_dim = static_cast<int>(parse_int(key, value));
    } else if (key == "rmt_samples") {
        cfg.rmt_samples = static_cast<int>(parse_int(key, value));
    } else if (key == "seed") {
        const long long s = parse_int(key, value);
        if (s < 0) throw ConfigError("seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "delete_one") {
        cfg.delete_one = parse_double(key, value);
    } else if (key == "threads") {
        cfg.threads = static_cast<unsigned>(parse_int(key, value));
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "cache_dir") {
        cfg.cache_dir = value;
    } else {
        throw ConfigError("unknown setting '" + key + "'");
    }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot read config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

void write_default_config(std::ostream& os) {
    const RunConfig d;
    os << "# maass-lab configuration; every key shows its default\n"
       << "# level N of Gamma_0(N): 1 or a prime\n"
       << "level = " << d.level << "\n"
       << "# symmetry types: even+, even-, odd+, odd- or all\n"
       << "sym = " << d.sym << "\n"
       << "# spectral parameter range LO:HI\n"
       << "r = " << format_real(d.r_lo) << ":" << format_real(d.r_hi) << "\n"
       << "# truncation error target of the expansion\n"
       << "eps = " << format_real(d.trunc_eps) << "\n"
       << "# refinement tolerance in R\n"
       << "tol = " << format_real(d.tol) << "\n"
       << "# collocation points per refine; 0 uses 4M + 8\n"
       << "n_points = " << d.n_points << "\n"
       << "# collocation height; 0 uses 0.9 times the fundamental-domain floor\n"
       << "y0 = " << format_real(d.y0) << "\n"
       << "# flag level-one eigenvalues as oldforms (level-one spectra are cached)\n"
       << "oldforms = " << (d.oldforms ? "true" : "false") << "\n"
       << "# split point of the L-function series; 0 uses 1/sqrt(N)\n"
       << "delta = " << format_real(d.delta) << "\n"
       << "# Z(t) is sampled on [0, min(tmax, R)]\n"
       << "tmax = " << format_real(d.t_max) << "\n"
       << "grid_step = " << format_real(d.grid_step) << "\n"
       << "# forms below this R are left out of the first-zero statistic\n"
       << "firstzero_r_min = " << format_real(d.firstzero_r_min) << "\n"
       << "# zero spacing uses forms above this R, zeros from index zero_start on\n"
       << "zerospacing_r_min = " << format_real(d.zerospacing_r_min) << "\n"
       << "zero_start = " << d.zero_start << "\n"
       << "# forms skipped per symmetry type in the critical-value statistic\n"
       << "critval_skip = " << d.critval_skip << "\n"
       << "# moving-window width in entries; 0 uses 150, or 0.15 n below 1000 entries\n"
       << "window = " << d.window << "\n"
       << "audit_threshold = " << format_real(d.audit_threshold) << "\n"
       << "# random matrix references\n"
       << "rmt_dim = " << d.rmt_dim << "\n"
       << "rmt_samples = " << d.rmt_samples << "\n"
       << "seed = " << d.seed << "\n"
       << "# 0 uses every hardware thread\n"
       << "threads = " << d.threads << "\n"
       << "out = " << d.out << "\n"
       << "# empty uses $MAASS_LAB_CACHE, else ~/.cache/maass-lab\n"
       << "cache_dir = " << d.cache_dir << "\n";
}

json config_json(const RunConfig& cfg) {
    json j;
    j["level"] = cfg.level;
    j["sym"] = cfg.sym;
    j["r"] = format_real(cfg.r_lo) + ":" + format_real(cfg.r_hi);
    j["eps"] = cfg.trunc_eps;
    j["tol"] = cfg.tol;
    j["n_points"] = cfg.n_points;
    j["y0"] = cfg.y0;
    j["oldforms"] = cfg.oldforms;
    j["delta"] = cfg.delta;
    j["tmax"] = cfg.t_max;
    j["grid_step"] = cfg.grid_step;
    j["firstzero_r_min"] = cfg.firstzero_r_min;
    j["zerospacing_r_min"] = cfg.zerospacing_r_min;
    j["zero_start"] = cfg.zero_start;
    j["critval_skip"] = cfg.critval_skip;
    j["window"] = cfg.window;
    j["audit_threshold"] = cfg.audit_threshold;
    j["rmt_dim"] = cfg.rmt_dim;
    j["rmt_samples"] = cfg.rmt_samples;
    j["seed"] = cfg.seed;
    return j;
}

std::vector<SymmetryType> selected_symmetries(const RunConfig& cfg) {
    if (cfg.sym == "all") {
        if (cfg.level == 1) return {SymmetryType::parse("even+"), SymmetryType::parse("odd-")};
        return SymmetryType::all();
    }
    SymmetryType s;
    try {
        s = SymmetryType::parse(cfg.sym);
    } catch (const DomainError&) {
        throw ConfigError("--sym must be one of even+, even-, odd+, odd-, all; got '" + cfg.sym + "'");
    }
    if (cfg.level == 1 && s.fricke_sign != (s.parity == Parity::Even ? 1 : -1)) {
        throw ConfigError("level 1 only has even+ and odd- forms");
    }
    return {s};
}

std::string cache_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("MAASS_LAB_CACHE"); env && *env) return env;
    if (!cfg.cache_dir.empty()) return cfg.cache_dir;
    if (const char* home = std::getenv("HOME"); home && *home) return std::string(home) + "/.cache/maass-lab";
    return cfg.out + "/cache";
}

// ---------------------------------------------------------------------------
// Records

std::string format_real(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string form_id(const MaassForm& f) {
    const auto name = f.symmetry.name();
    const std::string code = name.substr(0, name.size() - 1) + (f.symmetry.fricke_sign > 0 ? "p" : "m");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld_%s_%.8f", static_cast<long long>(f.level), code.c_str(), f.R);
    return buf;
}

json form_to_json(const MaassForm& f) {
    json j;
    j["id"] = form_id(f);
    j["level"] = f.level;
    j["symmetry"] = f.symmetry.name();
    j["R"] = format_real(f.R);
    j["residual"] = real(f.residual);
    j["trunc_eps"] = real(f.trunc_eps);
    j["reliable"] = f.reliable;
    j["dip_contrast"] = real(f.dip_contrast);
    j["oldform"] = f.is_oldform;
    j["config"] = {{"M", f.config.M},
                   {"n_points", f.config.n_points},
                   {"y0", real(f.config.y0)},
                   {"trunc_eps", real(f.config.trunc_eps)},
                   {"fricke_rows", f.config.fricke_rows},
                   {"layout", f.config.layout == Layout::Real ? "real" : "complex"}};
    json c = json::array();
    for (const auto& a : f.coeffs) c.push_back({real(a.real()), real(a.imag())});
    j["coefficients"] = std::move(c);
    return j;
}

MaassForm form_from_json(const json& j) {
    try {
        MaassForm f;
        f.level = j.at("level").get<std::int64_t>();
        f.symmetry = SymmetryType::parse(j.at("symmetry").get<std::string>());
        f.R = real_from(j.at("R"));
        f.residual = real_from(j.at("residual"));
        f.trunc_eps = real_from(j.at("trunc_eps"));
        f.reliable = j.at("reliable").get<int>();
        f.dip_contrast = real_from(j.at("dip_contrast"));
        f.is_oldform = j.at("oldform").get<bool>();
        const auto& c = j.at("config");
        f.config.M = c.at("M").get<int>();
        f.config.n_points = c.at("n_points").get<int>();
        f.config.y0 = real_from(c.at("y0"));
        f.config.trunc_eps = real_from(c.at("trunc_eps"));
        f.config.fricke_rows = c.at("fricke_rows").get<bool>();
        f.config.layout = c.at("layout").get<std::string>() == "real" ? Layout::Real : Layout::Complex;
        for (const auto& a : j.at("coefficients")) f.coeffs.emplace_back(real_from(a.at(0)), real_from(a.at(1)));
        return f;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed form record: ") + e.what());
    }
}

json zgrid_to_json(const ZGrid& g) {
    json j;
    j["level"] = g.level;
    j["R"] = format_real(g.R);
    j["symmetry"] = g.symmetry.name();
    j["epsilon"] = g.epsilon;
    j["t"] = real_array(g.t);
    j["Z"] = real_array(g.Z);
    j["max_imag_leak"] = real(g.max_imag_leak);
    j["zeros"] = real_array(g.zeros);
    j["tangential"] = real_array(g.tangential);
    j["critical_value"] = real(g.critical_value);
    j["critical_kind"] = to_string(g.critical_kind);
    return j;
}

ZGrid zgrid_from_json(const json& j) {
    try {
        ZGrid g;
        g.level = j.at("level").get<std::int64_t>();
        g.R = real_from(j.at("R"));
        g.symmetry = SymmetryType::parse(j.at("symmetry").get<std::string>());
        g.epsilon = j.at("epsilon").get<int>();
        g.t = reals(j.at("t"));
        g.Z = reals(j.at("Z"));
        g.max_imag_leak = real_from(j.at("max_imag_leak"));
        g.zeros = reals(j.at("zeros"));
        g.tangential = reals(j.at("tangential"));
        g.critical_value = real_from(j.at("critical_value"));
        g.critical_kind = j.at("critical_kind").get<std::string>() == to_string(CriticalKind::Value)
                              ? CriticalKind::Value
                              : CriticalKind::Derivative;
        return g;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed zgrid record: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Files

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("missing file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NotFoundError("cannot write " + path);
        out << bytes;
    }
    fs::rename(tmp, p);
}

bool Store::exists() const { return fs::exists(path("manifest.json")); }

json Store::load_manifest() const {
    if (!exists()) throw NotFoundError("no manifest.json in " + dir_ + "; run scan first");
    try {
        return json::parse(read_file(path("manifest.json")));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
}

std::vector<MaassForm> Store::load_forms() const {
    std::istringstream in(read_file(path("forms.jsonl")));
    std::vector<MaassForm> forms;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            forms.push_back(form_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed forms.jsonl line: ") + e.what());
        }
    }
    return forms;
}

ZGrid Store::load_zgrid(const std::string& id) const {
    try {
        return zgrid_from_json(json::parse(read_file(path("zgrid_" + id + ".json"))));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed zgrid file: ") + e.what());
    }
}

std::vector<ZGrid> Store::load_zgrids() const {
    const json m = load_manifest();
    std::vector<ZGrid> out;
    for (const auto& id : m.value("zgrids", json::array())) out.push_back(load_zgrid(id.get<std::string>()));
    return out;
}

std::string Store::save_forms(std::vector<MaassForm> forms) const {
    const auto order = SymmetryType::all();
    auto rank = [&](const SymmetryType& s) { return std::find(order.begin(), order.end(), s) - order.begin(); };
    std::stable_sort(forms.begin(), forms.end(), [&](const MaassForm& a, const MaassForm& b) {
        if (rank(a.symmetry) != rank(b.symmetry)) return rank(a.symmetry) < rank(b.symmetry);
        return a.R < b.R;
    });
    std::string text;
    for (const auto& f : forms) text += form_to_json(f).dump() + "\n";
    write_file(path("forms.jsonl"), text);
    return text;
}

std::string Store::save_zgrid(const std::string& id, const ZGrid& g) const {
    const std::string text = zgrid_to_json(g).dump() + "\n";
    write_file(path("zgrid_" + id + ".json"), text);
    return text;
}

std::string manifest_hash(const json& manifest) {
    json copy = manifest;
    copy.erase("hash");
    return sha256_hex(copy.dump());
}

void Store::save_manifest(json manifest) const {
    json records = json::object();
    if (fs::exists(path("forms.jsonl"))) records["forms.jsonl"] = sha256_hex(read_file(path("forms.jsonl")));
    for (const auto& id : manifest.value("zgrids", json::array())) {
        const std::string name = "zgrid_" + id.get<std::string>() + ".json";
        records[name] = sha256_hex(read_file(path(name)));
    }
    for (const auto& name : manifest.value("series", json::array())) {
        records[name.get<std::string>()] = sha256_hex(read_file(path(name.get<std::string>())));
    }
    manifest["records"] = std::move(records);
    manifest["hash"] = manifest_hash(manifest);
    write_file(path("manifest.json"), manifest.dump(2) + "\n");
}

}  // namespace maass::cli
