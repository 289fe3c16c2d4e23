// SPDX-License-Identifier: Apache-2.0
//
// Closed-form optimal receive normalizing factors and the max MSE ratio they
// induce.
#pragma once

#include "aircomp/channel.hpp"
#include "aircomp/scenario.hpp"
#include "aircomp/state.hpp"

namespace aircomp {

/// eta*_{l,m}[n] = sum_k sqrt(p_k)|h_k| / (sum_all p|h|^2 + sigma^2) on active
/// triples, exactly zero elsewhere.
Normalizers optimal_eta(const Scenario& s, const Assignment& a,
                        const PowerPlan& power, const ChannelGains& g);

/// Same closed form evaluated on every (l, m, n) as if it were active; used
/// by the scheduling step to rank hypothetical associations.
Normalizers hypothetical_eta(const Scenario& s, const PowerPlan& power,
                             const ChannelGains& g);

/// Gamma = max over scheduled (l, n) of MSE_{l,n}/eps_l at the given eta;
/// zero when nothing is scheduled.
double eta_gamma(const Scenario& s, const Assignment& a, const PowerPlan& power,
                 const Normalizers& eta, const ChannelGains& g);

}  // namespace aircomp
