#ifndef MDAG_TIME_SERIES_HPP
#define MDAG_TIME_SERIES_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mdag {

/// Multivariate series of one subject: values(n, i) is variable i+1 at time n+1.
struct TimeSeries {
    std::string subject;
    std::vector<std::string> variables;
    Eigen::MatrixXd values;

    int n_steps() const { return static_cast<int>(values.rows()); }
    int p() const { return static_cast<int>(values.cols()); }

    /// Throws InputError unless N >= 1, names match columns and all entries are finite.
    void validate() const;
};

/// CSV with a header row of variable names and one row per time point.
TimeSeries read_time_series_csv(std::istream& in, const std::string& subject, const std::string& source);
TimeSeries read_time_series_csv(const std::filesystem::path& path, const std::string& subject);
void write_time_series_csv(std::ostream& out, const TimeSeries& series);

struct ManifestEntry {
    std::string subject;
    std::filesystem::path path;  ///< resolved against the manifest's directory
};

/// Two-column CSV `subject,path`. Subject ids must be unique and free of whitespace.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& entries);

/// Checks a subject id is usable as a file stem and cache token.
void validate_subject_id(const std::string& id);

}  // namespace mdag

#endif  // MDAG_TIME_SERIES_HPP
