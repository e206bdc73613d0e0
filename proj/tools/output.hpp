#pragma once

// CSV artifacts. Each file starts with one '#' line stating conventions and
// units, then a header row; numbers are written in the shortest round-trip form, so
// identical runs give byte-identical files. Missing values are "nan".

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "csprop/experiments.hpp"

namespace csprop::cli {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& comment,
            const std::vector<std::string>& header);

  CsvWriter& num(double x);
  CsvWriter& num(std::optional<double> x);
  CsvWriter& integer(long x);
  CsvWriter& text(const std::string& s);
  void end_row();

  std::size_t rows() const { return rows_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  void sep();
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t rows_ = 0;
  bool first_ = true;
};

std::string format_number(double x);

struct WrittenFile {
  std::string name;
  std::size_t rows;
};

WrittenFile write_wmap(const std::filesystem::path& path, const WMap& map);
WrittenFile write_seeds(const std::filesystem::path& path, const std::vector<cplx>& seeds,
                        const std::vector<std::optional<Root>>& refined);
WrittenFile write_families(const std::filesystem::path& path, const FamilySearch& search);
WrittenFile write_caustics(const std::filesystem::path& path,
                           const std::vector<CausticEvent>& events);
WrittenFile write_exact(const std::filesystem::path& path, const ExactCurve& curve);
WrittenFile write_samples(const std::filesystem::path& path,
                          const std::vector<PropagatorSample>& samples,
                          const std::vector<std::string>& family_ids,
                          const std::vector<std::vector<std::string>>& combinations);

}  // namespace csprop::cli
