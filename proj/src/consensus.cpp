// Copyright 2026 The patchasm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "patchasm/consensus.hpp"

#include "patchasm/parallel.hpp"

namespace patchasm {

PairTable::PairTable(const PatchGeometry& g) : channels_(g.channels()) {
  code_.resize(static_cast<std::size_t>(channels_) * channels_);
  for (int i = 0; i < channels_; ++i) {
    const Coord& oi = g.offset(i);
    for (int j = 0; j < channels_; ++j) {
      const Coord& oj = g.offset(j);
      bool canonical = false;
      const int plane = *g.plane_of({oj[0] - oi[0], oj[1] - oi[1], oj[2] - oi[2]}, &canonical);
      code_[index(i, j)] = (plane << 1) | (canonical ? 1 : 0);
    }
  }
}

std::optional<double> ConsensusField::aff(Index y, Index z) const {
  const Coord cy = grid_.coord(y);
  const Coord cz = grid_.coord(z);
  bool canonical = false;
  const auto plane = geometry_.plane_of({cz[0] - cy[0], cz[1] - cy[1], cz[2] - cy[2]}, &canonical);
  if (!plane) return std::nullopt;
  const Index s = slot(canonical ? y : z);
  if (s < 0) return std::nullopt;
  return entry(s, *plane);
}

double ConsensusField::numerator(Index anchor, int plane) const {
  const Index s = slot(anchor);
  return s < 0 ? 0.0 : numerator_[static_cast<std::size_t>(s) * planes_ + plane];
}

std::uint32_t ConsensusField::z_count(Index anchor, int plane) const {
  const Index s = slot(anchor);
  return s < 0 ? 0u : count_[static_cast<std::size_t>(s) * planes_ + plane];
}

namespace {

template <class T, class Get>
Tensor<T> dump_planes(const ConsensusField& f, Get get) {
  std::vector<std::size_t> shape{static_cast<std::size_t>(f.planes())};
  for (Index s : f.grid().shape()) shape.push_back(static_cast<std::size_t>(s));
  Tensor<T> out(shape);
  const Index n = f.grid().size();
  for (int p = 0; p < f.planes(); ++p)
    for (Index x = 0; x < n; ++x) out[p * n + x] = get(x, p);
  return out;
}

}  // namespace

Tensor<double> ConsensusField::numerator_planes() const {
  return dump_planes<double>(*this, [this](Index x, int p) { return numerator(x, p); });
}

Tensor<std::uint32_t> ConsensusField::count_planes() const {
  return dump_planes<std::uint32_t>(*this, [this](Index x, int p) { return z_count(x, p); });
}

ConsensusField accumulate(const PredictionBundle& b, const PixelSet& foreground,
                          const PixelSet& discard, const ConsensusOptions& options) {
  const Index n = b.grid.size();
  if (static_cast<Index>(foreground.mask.size()) != n || static_cast<Index>(discard.mask.size()) != n)
    throw ValidationError("foreground/discard masks disagree with the bundle's spatial shape");

  ConsensusField f;
  f.geometry_ = b.geometry;
  f.grid_ = b.grid;
  f.planes_ = b.geometry.planes();
  f.sparse_ = options.sparse;

  Index slots = n;
  if (options.sparse) {
    f.domain_ = foreground.mask;
    f.slot_of_.assign(n, -1);
    slots = 0;
    for (Index x : foreground.pixels) f.slot_of_[x] = slots++;
  }
  f.numerator_.assign(static_cast<std::size_t>(slots) * f.planes_, 0.0);
  f.count_.assign(static_cast<std::size_t>(slots) * f.planes_, 0u);

  // Predicting pixels grouped into bands along the outermost spatial axis. A
  // patch only writes entries anchored within one radius of its center, so
  // bands at least two radii tall that share a parity never touch the same
  // entry. Even bands run first, then odd ones; the summation order per entry
  // is therefore fixed regardless of the thread count.
  const int axis = 3 - b.grid.dims();
  const Index band_height = std::max<Index>(1, 2 * b.geometry.radius()[axis]);
  const Index bands = (b.grid.shape3()[axis] + band_height - 1) / band_height;
  std::vector<std::vector<Index>> band_pixels(bands);
  auto add_predictor = [&](Index x) {
    if (discard.mask[x]) return;
    band_pixels[b.grid.coord(x)[axis] / band_height].push_back(x);
  };
  if (options.sparse) {
    for (Index x : foreground.pixels) add_predictor(x);
  } else {
    for (Index x = 0; x < n; ++x) add_predictor(x);
  }

  const PairTable table(b.geometry);
  const int planes = f.planes_;
  const Mask* domain = options.sparse ? &f.domain_ : nullptr;
  double* num = f.numerator_.data();
  std::uint32_t* cnt = f.count_.data();
  const Index* slot_of = f.slot_of_.empty() ? nullptr : f.slot_of_.data();

  auto process_band = [&](const std::vector<Index>& xs, PatchWindow& win) {
    std::vector<int> fg;
    for (Index x : xs) {
      gather_window(b, x, domain, &discard.mask, win);
      fg.clear();
      for (std::size_t i = 0; i < win.size(); ++i)
        if (win.cls[i] == PixelClass::Foreground) fg.push_back(static_cast<int>(i));
      if (fg.empty()) continue;
      const std::size_t w = win.size();
      for (int i : fg) {
        const double pi = win.prob[i];
        const Index yi = win.pixel[i];
        const int ci = win.channel[i];
        for (std::size_t j = 0; j < w; ++j) {
          const PixelClass cj = win.cls[j];
          if (cj == PixelClass::Foreground && static_cast<int>(j) < i) continue;
          const std::int32_t code = table.code(ci, win.channel[j]);
          const Index anchor = (code & 1) ? yi : win.pixel[j];
          const Index s = slot_of ? slot_of[anchor] : anchor;
          const std::size_t e = static_cast<std::size_t>(s) * planes + (code >> 1);
          ++cnt[e];
          if (cj == PixelClass::Foreground) {
            num[e] += pi * static_cast<double>(win.prob[j]);
          } else if (cj == PixelClass::Background) {
            num[e] -= pi * (1.0 - static_cast<double>(win.prob[j]));
          }
        }
      }
    }
  };

  for (Index parity = 0; parity < 2; ++parity) {
    std::vector<Index> phase;
    for (Index k = parity; k < bands; k += 2)
      if (!band_pixels[k].empty()) phase.push_back(k);
    parallel_for(static_cast<Index>(phase.size()), options.threads,
                 [&](Index begin, Index end, int) {
                   PatchWindow win;
                   for (Index k = begin; k < end; ++k) process_band(band_pixels[phase[k]], win);
                 });
  }
  return f;
}

}  // namespace patchasm
