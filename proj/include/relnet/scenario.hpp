#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relnet/analysis.hpp"
#include "relnet/bvp.hpp"
#include "relnet/sim.hpp"

namespace relnet {

// Exit codes of the CLI surface.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCompareFailed = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitDomain = 3;

struct ScenarioError : std::runtime_error {
    int exit_code;
    ScenarioError(int code, const std::string& msg) : std::runtime_error(msg), exit_code(code) {}
};

// Plain hierarchical key-value scenario document: `[section]`, `key = value`,
// `#` comments.  Keys carry units in their names (…_w, …_m, …_slots).
struct ScenarioDoc {
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, Entry> values;  // "section.key" or "key"

    static ScenarioDoc parse_file(const std::filesystem::path& path);
    static ScenarioDoc parse_string(const std::string& text, const std::string& name = "<string>");

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& dflt) const;
    double get_number(const std::string& key) const;
    double get_number_or(const std::string& key, double dflt) const;
    long long get_int_or(const std::string& key, long long dflt) const;
    std::vector<double> get_list(const std::string& key) const;

private:
    std::string name_;
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

struct Scenario {
    std::string task;                  // phy-table, region, throughput, ...
    std::string figure_id;             // for task = figure
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 1;
    int grid_size = 512;
    int replications = 10;
    bool verbose = false;

    std::optional<PhyGeometry> phy;
    double sinr_threshold = 0.2;
    double calibration_target = 0.74;
    ChannelModel channel = ChannelModel::capture;
    std::optional<SuccessProbabilities> probs_override;
    SystemParams params;
    std::uint64_t horizon = 1'000'000;
    std::uint64_t warmup = 10'000;
    double probe_dir1 = 1.0, probe_dir2 = 0.0;
    std::map<std::string, std::vector<double>> grid;
    std::string compare_analytic, compare_simulated;
    double compare_tolerance = 0.02;

    SuccessProbabilities resolve_probs() const;

    static Scenario load(const std::filesystem::path& path);
    static Scenario from_doc(const ScenarioDoc& doc);
};

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> grid_size;
    std::optional<int> replications;
    std::optional<std::string> out_dir;
    bool verbose = false;
};

// Executes the scenario's task, writing CSV artifacts under out_dir.
// Returns a process exit code; failures are also reported on stderr.
int run_scenario(const std::filesystem::path& path, const CliOverrides& overrides);

// Side-by-side analytic/simulation comparison over the scenario grid.
int run_compare(const std::filesystem::path& path, const CliOverrides& overrides);

// Emits the named figure's data and a gnuplot script. Known ids:
//   stab-gamma02 stab-gamma1 thr-user thr-aggregate
//   delay-sym-r delay-sym-t delay-sym-alphastar region-t1 region-alpha1star
int run_figure(const std::string& figure_id, const CliOverrides& overrides);

std::vector<std::string> figure_ids();

}  // namespace relnet
