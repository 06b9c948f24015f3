#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dehb.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "space.hpp"

namespace shapeopt {

inline constexpr const char* journal_format = "shapeopt-journal";
inline constexpr int journal_version = 1;

struct JournalHeader {
    std::string kind; ///< "optimization", "evaluation" or "sweep"
    std::string config_hash;
    std::string arm;
    std::uint64_t run_index = 0;

    nlohmann::json to_json() const
    {
        return {{"type", "header"},         {"format", journal_format}, {"version", journal_version},
                {"kind", kind},             {"config_hash", config_hash}, {"arm", arm},
                {"run_index", run_index}};
    }

    static JournalHeader from_json(const nlohmann::json& j, long line)
    {
        try {
            if (j.at("type") != "header" || j.at("format") != journal_format)
                throw integrity_error("journal header missing", line);
            if (j.at("version").get<int>() != journal_version)
                throw integrity_error("unsupported journal version", line);
            return {j.at("kind").get<std::string>(), j.at("config_hash").get<std::string>(),
                    j.at("arm").get<std::string>(), j.at("run_index").get<std::uint64_t>()};
        } catch (const nlohmann::json::exception& e) {
            throw integrity_error(std::string("malformed journal header: ") + e.what(), line);
        }
    }
};

enum class EvalStatus { ok, failed };

/// One fitness evaluation. `unit` drives `values` through the DEHB space;
/// `rs_unit` does the same for randomly sampled reward parameters.
struct EvalRecord {
    std::uint64_t seq = 0;
    std::string config_id;
    std::vector<double> unit;
    std::optional<std::vector<double>> rs_unit;
    ValueMap values;
    Budget budget = 0;
    std::size_t rung = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_seed;
    double fitness = failed_fitness;
    EvalStatus status = EvalStatus::ok;
    std::string failure;

    nlohmann::json to_json() const
    {
        nlohmann::json per = nlohmann::json::array();
        for (double v : per_seed)
            per.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
        nlohmann::json j{{"type", "eval"},
                         {"seq", seq},
                         {"config_id", config_id},
                         {"unit", unit},
                         {"values", values},
                         {"budget", budget},
                         {"rung", rung},
                         {"seeds", seeds},
                         {"per_seed", per},
                         {"fitness", status == EvalStatus::ok ? nlohmann::json(fitness) : nlohmann::json(nullptr)},
                         {"status", status == EvalStatus::ok ? "ok" : "failed"}};
        if (rs_unit)
            j["rs_unit"] = *rs_unit;
        if (!failure.empty())
            j["failure"] = failure;
        return j;
    }

    static EvalRecord from_json(const nlohmann::json& j, long line)
    {
        EvalRecord r;
        try {
            if (j.at("type") != "eval")
                throw integrity_error("expected an eval record", line);
            r.seq = j.at("seq").get<std::uint64_t>();
            r.config_id = j.at("config_id").get<std::string>();
            r.unit = j.at("unit").get<std::vector<double>>();
            if (j.contains("rs_unit"))
                r.rs_unit = j.at("rs_unit").get<std::vector<double>>();
            r.values = j.at("values").get<ValueMap>();
            r.budget = j.at("budget").get<Budget>();
            r.rung = j.at("rung").get<std::size_t>();
            r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
            for (const auto& v : j.at("per_seed"))
                r.per_seed.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
            const auto status = j.at("status").get<std::string>();
            if (status != "ok" && status != "failed")
                throw integrity_error("unknown status '" + status + "'", line);
            r.status = status == "ok" ? EvalStatus::ok : EvalStatus::failed;
            r.fitness = j.at("fitness").is_null() ? failed_fitness : j.at("fitness").get<double>();
            if (j.contains("failure"))
                r.failure = j.at("failure").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw integrity_error(std::string("malformed eval record: ") + e.what(), line);
        }
        return r;
    }
};

/// Checks that a record is internally consistent: the unit vectors decode to
/// the stored values, the id matches the unit, and fitness is the mean of the
/// per-seed values.
inline void validate_record(const EvalRecord& r, const SearchSpace& space, const std::optional<SearchSpace>& rs_space,
                            long line)
{
    if (r.unit.size() != space.dimension())
        throw integrity_error("unit vector has the wrong dimension", line);
    for (double u : r.unit)
        if (!(u >= 0.0 && u <= 1.0))
            throw integrity_error("unit coordinate outside [0, 1]", line);
    if (unit_id(r.unit) != r.config_id)
        throw integrity_error("config_id does not match the unit vector", line);
    auto check_decoded = [&](const SearchSpace& s, const std::vector<double>& unit) {
        const auto decoded = decode(s, unit);
        for (const auto& [name, v] : decoded) {
            const auto it = r.values.find(name);
            if (it == r.values.end() || it->second != v)
                throw integrity_error("value of '" + name + "' does not re-decode from the unit vector", line);
        }
    };
    check_decoded(space, r.unit);
    if (rs_space) {
        if (!r.rs_unit || r.rs_unit->size() != rs_space->dimension())
            throw integrity_error("missing or malformed rs_unit", line);
        check_decoded(*rs_space, *r.rs_unit);
    }
    if (r.seeds.size() != r.per_seed.size())
        throw integrity_error("seeds and per_seed differ in length", line);
    if (r.status == EvalStatus::ok) {
        if (r.per_seed.empty() || mean_of(r.per_seed) != r.fitness)
            throw integrity_error("fitness is not the mean of the per-seed values", line);
    } else if (r.fitness != failed_fitness) {
        throw integrity_error("failed record carries a fitness", line);
    }
}

/// Append-only JSONL writer; every line is flushed before returning.
class JournalWriter {
public:
    JournalWriter(const std::filesystem::path& path, bool append) : path_(path)
    {
        if (path.has_parent_path())
            std::filesystem::create_directories(path.parent_path());
        out_.open(path, append ? std::ios::app : std::ios::trunc);
        if (!out_)
            throw std::runtime_error("cannot open journal '" + path.string() + "' for writing");
    }

    void write(const nlohmann::json& line)
    {
        out_ << line.dump() << '\n';
        out_.flush();
        if (!out_)
            throw std::runtime_error("write to journal '" + path_.string() + "' failed");
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

struct JournalContents {
    JournalHeader header;
    std::vector<nlohmann::json> entries; ///< lines after the header
    std::vector<long> lines;             ///< 1-based line number of each entry
    bool torn_tail = false;
};

/// Reads a journal. A torn final line (no trailing newline, unparsable) is
/// dropped as an interrupted write; any other unparsable line is an error.
inline JournalContents read_journal(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw integrity_error("cannot open journal '" + path.string() + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    JournalContents out;
    bool have_header = false;
    long line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const bool terminated = nl != std::string::npos;
        const std::string line = text.substr(pos, terminated ? nl - pos : std::string::npos);
        pos = terminated ? nl + 1 : text.size();
        ++line_no;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            if (!terminated) {
                out.torn_tail = true;
                break;
            }
            throw integrity_error("journal '" + path.string() + "' line " + std::to_string(line_no) +
                                      " is not a JSON object",
                                  line_no);
        }
        if (!have_header) {
            out.header = JournalHeader::from_json(j, line_no);
            have_header = true;
            continue;
        }
        out.entries.push_back(std::move(j));
        out.lines.push_back(line_no);
    }
    if (!have_header)
        throw integrity_error("journal '" + path.string() + "' has no header", 1);
    return out;
}

/// Rewrites a journal keeping the header and the first `keep` entries. Used
/// to drop a torn tail before appending.
inline void truncate_journal(const std::filesystem::path& path, const JournalContents& contents, std::size_t keep)
{
    JournalWriter w(path, false);
    w.write(contents.header.to_json());
    for (std::size_t i = 0; i < keep && i < contents.entries.size(); ++i)
        w.write(contents.entries[i]);
}

} // namespace shapeopt
