#include "mdag/time_series.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "mdag/errors.hpp"
#include "mdag/text_format.hpp"

namespace mdag {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(trim(field));
    return fields;
}

}  // namespace

void TimeSeries::validate() const {
    if (values.rows() < 1) throw InputError("time series '" + subject + "' has no time points");
    if (values.cols() < 1) throw InputError("time series '" + subject + "' has no variables");
    if (static_cast<Eigen::Index>(variables.size()) != values.cols()) {
        throw InputError("time series '" + subject + "': variable names do not match column count");
    }
    if (!values.allFinite()) throw InputError("time series '" + subject + "' contains non-finite values");
}

TimeSeries read_time_series_csv(std::istream& in, const std::string& subject, const std::string& source) {
    TimeSeries series;
    series.subject = subject;
    std::string line;
    int line_no = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (series.variables.empty()) {
            series.variables = fields;
            continue;
        }
        if (fields.size() != series.variables.size()) {
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(series.variables.size()) + " fields, got " + std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            double v = 0.0;
            if (!parse_double(f, v) || !std::isfinite(v)) {
                throw ParseError(source + ":" + std::to_string(line_no) + ": not a finite number: '" + f + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (series.variables.empty()) throw ParseError(source + ": missing header row");
    series.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(series.variables.size()));
    for (std::size_t n = 0; n < rows.size(); ++n) {
        for (std::size_t i = 0; i < rows[n].size(); ++i) {
            series.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = rows[n][i];
        }
    }
    try {
        series.validate();
    } catch (const InputError& e) {
        throw ParseError(source + ": " + e.what());
    }
    return series;
}

TimeSeries read_time_series_csv(const std::filesystem::path& path, const std::string& subject) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open time series file " + path.string());
    return read_time_series_csv(in, subject, path.string());
}

void write_time_series_csv(std::ostream& out, const TimeSeries& series) {
    for (std::size_t i = 0; i < series.variables.size(); ++i) {
        out << (i ? "," : "") << series.variables[i];
    }
    out << '\n';
    for (Eigen::Index n = 0; n < series.values.rows(); ++n) {
        for (Eigen::Index i = 0; i < series.values.cols(); ++i) {
            out << (i ? "," : "") << format_double(series.values(n, i));
        }
        out << '\n';
    }
}

void validate_subject_id(const std::string& id) {
    if (id.empty()) throw InputError("subject id must not be empty");
    for (char c : id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        if (!ok) throw InputError("subject id '" + id + "' may only contain letters, digits, '_', '-' and '.'");
    }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest " + path.string());
    const auto base = path.parent_path();
    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 2) throw ParseError(where + ": expected 2 fields (subject,path)");
        if (header) {
            if (fields[0] != "subject" || fields[1] != "path") {
                throw ParseError(where + ": header must be 'subject,path'");
            }
            header = false;
            continue;
        }
        try {
            validate_subject_id(fields[0]);
        } catch (const InputError& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!seen.insert(fields[0]).second) throw ParseError(where + ": duplicate subject '" + fields[0] + "'");
        std::filesystem::path p = fields[1];
        if (!p.empty() && p.is_relative()) p = base / p;
        entries.push_back({fields[0], p});
    }
    if (header) throw ParseError(path.string() + ": missing header row");
    if (entries.empty()) throw ParseError(path.string() + ": manifest lists no subjects");
    return entries;
}

void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries) {
    out << "subject,path\n";
    for (const auto& e : entries) out << e.subject << ',' << e.path.generic_string() << '\n';
}

}  // namespace mdag
