#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "synthattr/analysis/analysis.hpp"

namespace synthattr::analysis {

namespace {

double euclidean(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

double silhouette_score(const Matrix& points, const std::vector<int>& labels) {
  const std::size_t n = points.rows;
  if (labels.size() != n) throw DimensionMismatch("silhouette: label count");
  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw SingleClass("silhouette needs >= 2 classes");

  std::map<int, std::size_t> counts;
  for (int l : labels) counts[l]++;

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, double> dist_sum;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      dist_sum[labels[j]] += euclidean(points.row(i), points.row(j), points.cols);
    }
    const std::size_t own = counts[labels[i]];
    // Singleton clusters score 0 by convention.
    if (own <= 1) continue;
    const double a = dist_sum[labels[i]] / static_cast<double>(own - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [cls, sum] : dist_sum) {
      if (cls == labels[i]) continue;
      b = std::min(b, sum / static_cast<double>(counts[cls]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(n);
}

SeparationReport separation_report(const Matrix& points,
                                   const std::vector<int>& labels) {
  SeparationReport report;
  report.silhouette = silhouette_score(points, labels);

  std::set<int> class_set(labels.begin(), labels.end());
  const int class_count = *class_set.rbegin() + 1;
  Matrix centroids(class_count, points.cols);
  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t r = 0; r < points.rows; ++r) {
    counts[labels[r]]++;
    for (std::size_t c = 0; c < points.cols; ++c)
      centroids.at(labels[r], c) += points.at(r, c);
  }
  for (int cls = 0; cls < class_count; ++cls)
    if (counts[cls])
      for (std::size_t c = 0; c < points.cols; ++c)
        centroids.at(cls, c) /= static_cast<double>(counts[cls]);

  report.centroid_distances = Matrix(class_count, class_count);
  for (int a = 0; a < class_count; ++a)
    for (int b = 0; b < class_count; ++b)
      report.centroid_distances.at(a, b) =
          euclidean(centroids.row(a), centroids.row(b), points.cols);

  report.intra_dispersion.assign(class_count, 0.0);
  for (std::size_t r = 0; r < points.rows; ++r)
    report.intra_dispersion[labels[r]] +=
        euclidean(points.row(r), centroids.row(labels[r]), points.cols);
  double mean = 0.0;
  int populated = 0;
  for (int cls = 0; cls < class_count; ++cls)
    if (counts[cls]) {
      report.intra_dispersion[cls] /= static_cast<double>(counts[cls]);
      mean += report.intra_dispersion[cls];
      ++populated;
    }
  report.mean_intra_dispersion = populated ? mean / populated : 0.0;
  return report;
}

void write_embedding_csv(const std::string& path, const Matrix& points2d,
                         const std::vector<int>& labels, const std::string& source) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  os << "x,y,label,source\n";
  os.precision(10);
  for (std::size_t r = 0; r < points2d.rows; ++r)
    os << points2d.at(r, 0) << ',' << points2d.at(r, 1) << ',' << labels[r] << ','
       << source << '\n';
}

namespace {
const char* kPalette[] = {"#4363d8", "#ffe119", "#42d4f4",
                          "#3cb44b", "#bfef45", "#f032e6",
                          "#e6194b", "#911eb4", "#9a6324"};
constexpr int kPaletteSize = 9;
}  // namespace

void write_scatter_svg(const std::string& path, const Matrix& points2d,
                       const std::vector<int>& labels, const std::string& title) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open " + path + " for writing");
  const int w = 640, h = 640, margin = 48;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (points2d.rows) {
    xmin = xmax = points2d.at(0, 0);
    ymin = ymax = points2d.at(0, 1);
    for (std::size_t r = 0; r < points2d.rows; ++r) {
      xmin = std::min(xmin, points2d.at(r, 0));
      xmax = std::max(xmax, points2d.at(r, 0));
      ymin = std::min(ymin, points2d.at(r, 1));
      ymax = std::max(ymax, points2d.at(r, 1));
    }
  }
  const double xspan = xmax > xmin ? xmax - xmin : 1.0;
  const double yspan = ymax > ymin ? ymax - ymin : 1.0;

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" font-size=\"16\">"
     << title << "</text>\n";
  for (std::size_t r = 0; r < points2d.rows; ++r) {
    const double px =
        margin + (points2d.at(r, 0) - xmin) / xspan * (w - 2 * margin);
    const double py =
        h - margin - (points2d.at(r, 1) - ymin) / yspan * (h - 2 * margin);
    const int cls = labels[r] >= 0 ? labels[r] : kPaletteSize - 1;
    os << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"3\" fill=\""
       << kPalette[cls % kPaletteSize] << "\" fill-opacity=\"0.7\"/>\n";
  }
  std::set<int> classes(labels.begin(), labels.end());
  int row = 0;
  for (int cls : classes) {
    const int cy = margin + 18 * row++;
    os << "<circle cx=\"" << w - margin - 70 << "\" cy=\"" << cy
       << "\" r=\"5\" fill=\"" << kPalette[(cls >= 0 ? cls : kPaletteSize - 1) % kPaletteSize]
       << "\"/>\n";
    os << "<text x=\"" << w - margin - 58 << "\" y=\"" << cy + 4
       << "\" font-family=\"sans-serif\" font-size=\"12\">class " << cls
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace synthattr::analysis
