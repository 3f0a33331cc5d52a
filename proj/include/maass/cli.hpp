#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maass/lfun.hpp"
#include "maass/locator.hpp"
#include "maass/spectra.hpp"

namespace maass::cli {

using json = nlohmann::json;

/// Every knob of a run. Defaults are the library defaults; keys of the config file
/// are the member names listed in write_default_config.
struct RunConfig {
    std::int64_t level = 11;
    std::string sym = "all";
    double r_lo = 1, r_hi = 10;
    bool r_given = false;  ///< lfun and stats use the stored range unless set
    double trunc_eps = 1e-8;
    double tol = 1e-9;
    int n_points = 0;   ///< 0: 4M + 8
    double y0 = 0;      ///< 0: 0.9 times the fundamental-domain floor
    bool oldforms = true;

    double delta = 0;   ///< 0: 1/sqrt(N)
    double t_max = 20;
    double grid_step = 0.02;

    double firstzero_r_min = 15;
    double zerospacing_r_min = 21.5;
    int zero_start = 5;
    int critval_skip = 30;
    int window = 0;     ///< 0: 150, or 0.15 n below 1000 entries
    double audit_threshold = 0.6;
    int rmt_dim = 50;
    int rmt_samples = 10000;
    std::uint64_t seed = 1;
    std::optional<double> delete_one;
    std::vector<std::string> ids;

    unsigned threads = 0;  ///< 0: hardware concurrency
    std::string out = "maass-out";
    std::string cache_dir;  ///< empty: $MAASS_LAB_CACHE, else ~/.cache/maass-lab
};

/// Raised for malformed configuration or arguments (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Applies one "key = value" setting; ConfigError on unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// Reads a key = value file ('#' starts a comment).
void load_config_file(RunConfig& cfg, const std::string& path);
/// All keys with their defaults, one per line, each preceded by a comment.
void write_default_config(std::ostream& os);
/// The settings that determine results (no paths, no thread count).
json config_json(const RunConfig& cfg);
std::pair<double, double> parse_range(const std::string& text);
std::vector<SymmetryType> selected_symmetries(const RunConfig& cfg);
std::string cache_dir(const RunConfig& cfg);

// ---------------------------------------------------------------------------
// Persistence

std::string format_real(double x);  ///< shortest-safe "%.17g"
std::string form_id(const MaassForm& f);

json form_to_json(const MaassForm& f);
MaassForm form_from_json(const json& j);
json zgrid_to_json(const ZGrid& g);
ZGrid zgrid_from_json(const json& j);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::string& path);
/// Writes through a temporary file and rename, so readers never see a partial file.
void write_file(const std::string& path, const std::string& bytes);

/// forms.jsonl, zgrid_<id>.json and manifest.json in one directory.
class Store {
public:
    explicit Store(std::string dir) : dir_(std::move(dir)) {}

    const std::string& dir() const { return dir_; }
    bool exists() const;

    /// NotFoundError when the manifest or a listed file is missing.
    json load_manifest() const;
    std::vector<MaassForm> load_forms() const;
    ZGrid load_zgrid(const std::string& id) const;
    std::vector<ZGrid> load_zgrids() const;

    /// Forms are written sorted by symmetry type then R; returns the file text.
    std::string save_forms(std::vector<MaassForm> forms) const;
    std::string save_zgrid(const std::string& id, const ZGrid& g) const;
    /// Fills in file hashes and the overall hash, then writes manifest.json.
    void save_manifest(json manifest) const;

    std::string path(const std::string& name) const { return dir_ + "/" + name; }

private:
    std::string dir_;
};

/// Hash over the manifest with its "hash" member removed.
std::string manifest_hash(const json& manifest);

// ---------------------------------------------------------------------------
// Commands. Each returns the process exit code; reports go to `out`.

enum ExitCode { kOk = 0, kValidation = 2, kPrecision = 3, kMissing = 4 };

int cmd_scan(const RunConfig& cfg, std::ostream& out);
int cmd_refine(const RunConfig& cfg, std::ostream& out);
int cmd_lfun(const RunConfig& cfg, std::ostream& out);
int cmd_stats(const RunConfig& cfg, const std::string& which, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

/// Level-1 eigenvalues covering [lo, hi], read from or added to the cache.
std::vector<LevelOneEigenvalue> level_one_spectrum(double lo, double hi, const RunConfig& cfg);

/// Set by SIGINT; running commands stop taking new work and write what is done.
void request_stop();
bool stop_requested();

}  // namespace maass::cli
