#include "report.hpp"

#include "errors.hpp"
#include "records.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <sstream>

namespace pmbm {

namespace {

using nlohmann::json;

json summary_json(const MotSummary& s) {
    json j;
    if (s.gt_count == 0) {
        j["mota"] = "n/a";
    } else {
        j["mota"] = s.mota;
    }
    j["motp"] = s.motp;
    j["false_positives"] = s.false_positives;
    j["misses"] = s.misses;
    j["id_switches"] = s.id_switches;
    j["fragmentations"] = s.fragmentations;
    j["gt_count"] = s.gt_count;
    return j;
}

MotSummary summary_from(const json& j, const std::string& context) {
    if (!j.is_object()) throw ParseError(context + ": expected a JSON object");
    MotSummary s;
    auto number = [&](const char* key) -> double {
        if (!j.contains(key) || !j.at(key).is_number()) {
            throw ParseError(context + ": missing numeric field '" + std::string(key) + "'");
        }
        return j.at(key).get<double>();
    };
    auto count = [&](const char* key) -> std::int64_t {
        if (!j.contains(key) || !j.at(key).is_number_integer()) {
            throw ParseError(context + ": missing integer field '" + std::string(key) + "'");
        }
        return j.at(key).get<std::int64_t>();
    };
    s.gt_count = count("gt_count");
    if (j.contains("mota") && j.at("mota").is_string()) {
        if (j.at("mota").get<std::string>() != "n/a" || s.gt_count != 0) {
            throw ParseError(context + ": field 'mota' may only be \"n/a\" when gt_count is 0");
        }
        s.mota = 1.0;
    } else {
        s.mota = number("mota");
    }
    s.motp = number("motp");
    s.false_positives = count("false_positives");
    s.misses = count("misses");
    s.id_switches = count("id_switches");
    s.fragmentations = count("fragmentations");
    return s;
}

std::string format_mota(const MotSummary& s) {
    if (s.gt_count == 0) return "n/a";
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << s.mota;
    return out.str();
}

void table_row(std::ostringstream& out, const std::string& label, const MotSummary& s) {
    out << std::left << std::setw(12) << label << std::right << std::setw(8) << format_mota(s)
        << std::setw(8) << std::fixed << std::setprecision(3) << s.motp << std::setw(8)
        << s.false_positives << std::setw(8) << s.misses << std::setw(6) << s.id_switches
        << std::setw(6) << s.fragmentations << std::setw(8) << s.gt_count << '\n';
}

}  // namespace

MotSummary combine_summaries(const std::map<std::string, MotSummary>& per_class) {
    MotSummary total;
    double distance_sum = 0.0;
    std::int64_t match_sum = 0;
    for (const auto& [klass, s] : per_class) {
        (void)klass;
        total.false_positives += s.false_positives;
        total.misses += s.misses;
        total.id_switches += s.id_switches;
        total.fragmentations += s.fragmentations;
        total.gt_count += s.gt_count;
        const std::int64_t matches = s.gt_count - s.misses;  // every GT box is matched or missed
        distance_sum += s.motp * static_cast<double>(matches);
        match_sum += matches;
    }
    total.motp = match_sum > 0 ? distance_sum / static_cast<double>(match_sum) : 0.0;
    total.mota = total.gt_count > 0
                     ? 1.0 - static_cast<double>(total.false_positives + total.misses +
                                                 total.id_switches) /
                                 static_cast<double>(total.gt_count)
                     : 1.0;
    return total;
}

std::string summary_to_json(const MotSummary& summary) { return summary_json(summary).dump(); }

MotSummary summary_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("summary: not valid JSON");
    return summary_from(j, "summary");
}

std::string render_report_table(const std::map<std::string, MotSummary>& per_class,
                                const MotSummary& overall) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "class" << std::right << std::setw(8) << "mota"
        << std::setw(8) << "motp" << std::setw(8) << "fp" << std::setw(8) << "miss"
        << std::setw(6) << "ids" << std::setw(6) << "frag" << std::setw(8) << "gt" << '\n';
    out << std::string(64, '-') << '\n';
    for (const auto& [klass, s] : per_class) {
        table_row(out, klass, s);
    }
    table_row(out, "overall", overall);
    return out.str();
}

void emit_report(const MotSummary& summary, const std::string& path) {
    emit_report({}, summary, path);
}

void emit_report(const std::map<std::string, MotSummary>& per_class, const MotSummary& overall,
                 const std::string& path) {
    write_text_atomic(path, render_report_table(per_class, overall));
    json j;
    j["overall"] = summary_json(overall);
    json classes = json::object();
    for (const auto& [klass, s] : per_class) {
        classes[klass] = summary_json(s);
    }
    j["per_class"] = classes;
    write_text_atomic(path + ".json", j.dump(2) + "\n");
}

std::pair<std::map<std::string, MotSummary>, MotSummary> report_from_json(
    const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("report: not valid JSON");
    if (!j.contains("overall") || !j.contains("per_class") || !j.at("per_class").is_object()) {
        throw ParseError("report: expected 'overall' and 'per_class' fields");
    }
    std::map<std::string, MotSummary> per_class;
    for (const auto& [klass, value] : j.at("per_class").items()) {
        per_class[klass] = summary_from(value, "report class '" + klass + "'");
    }
    return {std::move(per_class), summary_from(j.at("overall"), "report overall")};
}

}  // namespace pmbm
