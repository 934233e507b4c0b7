#pragma once

#include <vector>

namespace augclust {

/// NMI normalizer convention. The arithmetic mean of the two entropies is
/// the default; the alternatives are exposed so reported numbers can be
/// reproduced under other conventions.
enum class NmiNorm { arithmetic, geometric, min, max };

/// Normalized mutual information of two labelings over the same points,
/// natural-log entropies, clamped to [0,1]. Degenerate conventions: both
/// entropies zero -> 1, exactly one zero -> 0. Label ids need not be
/// contiguous.
double nmi(const std::vector<int>& y, const std::vector<int>& c, NmiNorm norm = NmiNorm::arithmetic);

/// Rand index: fraction of point pairs on which the labelings agree (both
/// together or both apart), computed via contingency-table combinatorics.
/// Requires n >= 2.
double rand_index(const std::vector<int>& y, const std::vector<int>& c);

}  // namespace augclust
