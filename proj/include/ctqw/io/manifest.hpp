#ifndef CTQW_IO_MANIFEST_HPP
#define CTQW_IO_MANIFEST_HPP

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ctqw/errors.hpp"
#include "ctqw/io/csv.hpp"
#include "ctqw/io/digest.hpp"

#ifndef CTQW_VERSION
#define CTQW_VERSION "0.0.0"
#endif

namespace ctqw::io {

using json = nlohmann::json;

struct RunManifest {
    std::string tool_version = CTQW_VERSION;
    std::string command;
    /// Fully resolved configuration.
    json config = json::object();
    /// Grid size, Chebyshev order, leakage and headline results.
    json derived = json::object();
    /// File name (relative to the manifest) to SHA-256.
    std::map<std::string, std::string> files;
    double wall_clock_seconds = 0.0;

    json to_json() const
    {
        json j = json::object();
        j["tool_version"] = tool_version;
        j["command"] = command;
        j["config"] = config;
        j["derived"] = derived;
        j["files"] = files;
        j["wall_clock_seconds"] = wall_clock_seconds;
        return j;
    }

    static RunManifest from_json(const json& j)
    {
        RunManifest m;
        try {
            m.tool_version = j.at("tool_version").get<std::string>();
            m.command = j.at("command").get<std::string>();
            m.config = j.at("config");
            m.derived = j.at("derived");
            m.files = j.at("files").get<std::map<std::string, std::string>>();
            m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
        } catch (const json::exception& e) {
            throw IoError(std::string("malformed manifest: ") + e.what());
        }
        return m;
    }
};

/// Sorted keys, no whitespace, trailing newline.
inline std::string canonical_json(const json& j) { return j.dump() + "\n"; }

inline void write_manifest(const RunManifest& m, const std::filesystem::path& path)
{
    write_file(path, canonical_json(m.to_json()));
}

inline RunManifest read_manifest(const std::filesystem::path& path)
{
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError("cannot parse " + path.string() + ": " + e.what());
    }
    return RunManifest::from_json(j);
}

/// Output directory that digests everything written through it.
class ArtifactSet {
public:
    explicit ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& dir() const noexcept { return dir_; }

    std::filesystem::path write(const std::string& name, std::string_view bytes)
    {
        const auto path = dir_ / name;
        write_file(path, bytes);
        files_[name] = sha256_hex(bytes);
        return path;
    }

    std::filesystem::path write(const std::string& name, const Table& t) { return write(name, t.to_csv()); }

    const std::map<std::string, std::string>& digests() const noexcept { return files_; }

    /// Writes manifest.json with the digests collected so far.
    std::filesystem::path finish(RunManifest m, const std::string& name = "manifest.json")
    {
        m.files = files_;
        const auto path = dir_ / name;
        write_manifest(m, path);
        return path;
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> files_;
};

struct VerifyReport {
    std::size_t checked = 0;
    std::vector<std::string> mismatched;
    std::vector<std::string> missing;

    bool ok() const noexcept { return mismatched.empty() && missing.empty(); }
};

/// Recomputes every digest listed in the manifest.
inline VerifyReport verify_manifest(const std::filesystem::path& manifest_path)
{
    const RunManifest m = read_manifest(manifest_path);
    const auto base = manifest_path.parent_path();
    VerifyReport r;
    for (const auto& [name, digest] : m.files) {
        ++r.checked;
        const auto p = base / name;
        if (!std::filesystem::exists(p)) {
            r.missing.push_back(name);
            continue;
        }
        if (sha256_file(p) != digest) r.mismatched.push_back(name);
    }
    return r;
}

}  // namespace ctqw::io

#endif  // CTQW_IO_MANIFEST_HPP
