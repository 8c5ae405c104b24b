#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "squeezefit/errors.hpp"

namespace sqz::cli {

using Json = nlohmann::json;

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode { ok = 0, verification_failed = 1, infeasible = 2, input_error = 3 };

/// Binds command-line options to JSON config keys. Values given on the
/// command line win; keys not bound here are rejected.
class Options {
public:
    explicit Options(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* add(const std::string& flag, const std::string& key, T& var, const std::string& help) {
        CLI::Option* opt = app_->add_option(flag, var, help)->capture_default_str();
        bind(key, opt, var);
        return opt;
    }

    CLI::Option* add_flag(const std::string& flag, const std::string& key, bool& var, const std::string& help) {
        CLI::Option* opt = app_->add_flag(flag, var, help);
        bind(key, opt, var);
        return opt;
    }

    /// True when the key was set on the command line or by the config file.
    bool given(const std::string& key) const {
        auto it = entries_.find(key);
        return it != entries_.end() && (it->second.option->count() > 0 || it->second.from_config);
    }

    void apply_config(const Json& config, const std::string& command) {
        if (!config.is_object()) throw InvalidInput("config: top level must be an object");
        if (!config.contains("schema_version") || config["schema_version"] != kSchemaVersion)
            throw InvalidInput("config: schema_version must be " + std::to_string(kSchemaVersion));
        if (config.contains("command") && config["command"] != command)
            throw InvalidInput("config: written for command " + config["command"].dump() + ", not " + command);
        for (const auto& [key, value] : config.items()) {
            if (key == "schema_version" || key == "command") continue;
            auto it = entries_.find(key);
            if (it == entries_.end()) throw InvalidInput("config: unknown key \"" + key + "\"");
            if (it->second.option->count() > 0) continue;
            try {
                it->second.set(value);
            } catch (const Json::exception& e) {
                throw InvalidInput("config: bad value for \"" + key + "\": " + e.what());
            }
            it->second.from_config = true;
        }
    }

    Json echo() const {
        Json out = Json::object();
        for (const auto& [key, entry] : entries_) out[key] = entry.get();
        return out;
    }

private:
    struct Entry {
        CLI::Option* option = nullptr;
        std::function<void(const Json&)> set;
        std::function<Json()> get;
        bool from_config = false;
    };

    template <typename T>
    void bind(const std::string& key, CLI::Option* opt, T& var) {
        entries_[key] = Entry{opt, [&var](const Json& j) { var = j.get<T>(); }, [&var]() { return Json(var); }};
    }

    CLI::App* app_;
    std::map<std::string, Entry> entries_;
};

/// Shared flags of every subcommand.
struct Common {
    std::uint64_t seed = 0;
    std::string out = "out";
    std::string config;
    int threads = 1;

    void attach(CLI::App* app, Options& opts) {
        opts.add("--seed", "seed", seed, "Base random seed");
        opts.add("--out", "out", out, "Output directory");
        app->add_option("--config", config, "JSON config file (flags override its values)");
        opts.add("--threads", "threads", threads, "Worker threads for trial loops")->check(CLI::PositiveNumber);
    }

    std::filesystem::path dir() const {
        std::filesystem::create_directories(out);
        return out;
    }
};

/// Runs body(i) for i in [0, count) on `threads` workers. Each index writes its
/// own slot, so results do not depend on scheduling.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < count; i += workers) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

inline Json result_record(const std::string& command, std::uint64_t seed, const Json& config) {
    return Json{{"artifact_version", kArtifactVersion}, {"command", command}, {"seed", seed}, {"config", config}};
}

} // namespace sqz::cli
