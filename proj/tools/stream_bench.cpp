// Streams a synthetic 100x100x100 tensor (10^6 entries) through the two-pass
// sparsifier and reports peak resident memory growth against the size a dense
// copy would need. Exit status 1 if the growth reaches half the dense size.

#include <sys/resource.h>

#include <cstdio>

#include "tsparse/keyed_rng.hpp"
#include "tsparse/sparsify.hpp"

namespace {

long peak_rss_kib() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

}  // namespace

int main() {
  constexpr std::size_t n = 100;
  constexpr std::uint64_t kDataSeed = 31;
  const tsparse::Dims dims{n, n, n};

  const tsparse::EntrySource source = [&](const tsparse::EntryVisitor& visit) {
    std::size_t idx[3];
    for (idx[0] = 0; idx[0] < n; ++idx[0])
      for (idx[1] = 0; idx[1] < n; ++idx[1])
        for (idx[2] = 0; idx[2] < n; ++idx[2]) visit(idx, tsparse::keyed_gaussian(kDataSeed, idx));
  };

  const long before = peak_rss_kib();
  const tsparse::SketchResult r = tsparse::stream_sparsify(source, dims, 20000, 1);
  const long after = peak_rss_kib();

  const double dense_kib = static_cast<double>(n * n * n) * sizeof(double) / 1024.0;
  const long growth = after - before;
  std::printf("entries=%zu nnz=%zu expected_nnz=%.1f peak_rss_growth=%ld KiB dense_copy=%.0f KiB\n",
              n * n * n, r.sketch.nnz(), r.expected_nnz, growth, dense_kib);
  return static_cast<double>(growth) < dense_kib / 2 ? 0 : 1;
}
