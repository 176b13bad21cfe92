#include "eths/flowshop.hpp"

#include <algorithm>

namespace eths {

ShopState ShopState::fresh(int machines, int k0) {
    ShopState s;
    s.k0 = k0;
    s.machines.assign(static_cast<std::size_t>(machines), MachineStatus{});
    return s;
}

int ShopState::active_finish(int i) const {
    const auto& m = machines[i];
    if (m.remaining <= 0) return -1;
    return k0 + m.remaining + (m.up ? 0 : 1);
}

int ShopState::available(int i) const {
    const auto& m = machines[i];
    if (m.remaining > 0) return active_finish(i);
    return m.up ? k0 : k0 + 1;
}

int FlowShop::completion(const Plan& plan, int i, int j) const {
    const auto& m = state.machines[i];
    if (j < m.done) return state.k0;
    if (m.remaining > 0 && j == m.done) return state.active_finish(i);
    return plan.starts[i][j - m.started] + p(i);
}

Plan FlowShop::earliest() const {
    Plan plan;
    const int M = machines();
    plan.starts.resize(M);
    for (int i = 0; i < M; ++i) {
        int t = state.available(i);
        int r = remaining(i);
        plan.starts[i].resize(std::max(r, 0));
        for (int q = 0; q < r; ++q) {
            int j = state.machines[i].started + q;
            int s = t;
            if (i > 0) s = std::max(s, completion(plan, i - 1, j));
            plan.starts[i][q] = s;
            t = s + p(i);
        }
    }
    return plan;
}

Plan FlowShop::latest() const {
    Plan plan;
    const int M = machines();
    plan.starts.resize(M);
    for (int i = 0; i < M; ++i) plan.starts[i].resize(std::max(remaining(i), 0));
    for (int i = M - 1; i >= 0; --i) {
        int r = remaining(i);
        int next = horizon;  // start of the following op on this machine
        if (i == M - 1) next = std::min(horizon, deadline);
        for (int q = r - 1; q >= 0; --q) {
            int j = state.machines[i].started + q;
            int s = next - p(i);
            if (i + 1 < M) {
                int qd = j - state.machines[i + 1].started;
                if (qd >= 0 && qd < static_cast<int>(plan.starts[i + 1].size()))
                    s = std::min(s, plan.starts[i + 1][qd] - p(i));
            }
            plan.starts[i][q] = s;
            next = s;
        }
    }
    Plan es = earliest();
    for (int i = 0; i < M; ++i)
        for (std::size_t q = 0; q < plan.starts[i].size(); ++q)
            if (plan.starts[i][q] < es.starts[i][q]) return Plan{};
    // an op already in progress on the last machine may itself miss the deadline
    if (!feasible(plan)) return Plan{};
    return plan;
}

int FlowShop::completion_lower_bound() const {
    const int M = machines();
    if (n_jobs <= 0) return state.k0;
    Plan es = earliest();
    return completion(es, M - 1, n_jobs - 1);
}

bool FlowShop::feasible(const Plan& plan, bool check_deadline) const {
    const int M = machines();
    if (static_cast<int>(plan.starts.size()) != M) return false;
    for (int i = 0; i < M; ++i) {
        int r = std::max(remaining(i), 0);
        if (static_cast<int>(plan.starts[i].size()) != r) return false;
        int t = state.available(i);
        for (int q = 0; q < r; ++q) {
            int s = plan.starts[i][q];
            int j = state.machines[i].started + q;
            if (s < t) return false;
            if (i > 0 && s < completion(plan, i - 1, j)) return false;
            if (s + p(i) > horizon) return false;
            t = s + p(i);
        }
        int af = state.active_finish(i);
        if (af > horizon) return false;
    }
    if (check_deadline && n_jobs > 0 && completion(plan, M - 1, n_jobs - 1) > deadline) return false;
    return true;
}

void FlowShop::occupancy(const Plan& plan, std::vector<std::vector<int>>& on,
                         std::vector<std::vector<int>>& start) const {
    const int M = machines();
    const int T = std::max(horizon - state.k0, 0);
    on.assign(M, std::vector<int>(T, 0));
    start.assign(M, std::vector<int>(T, 0));
    for (int i = 0; i < M; ++i) {
        const auto& m = state.machines[i];
        if (m.remaining > 0) {
            int a = state.k0 + (m.up ? 0 : 1);
            for (int k = a; k < a + m.remaining && k < horizon; ++k) on[i][k - state.k0] = 1;
        }
        for (int s : plan.starts[i]) {
            if (s >= state.k0 && s < horizon) start[i][s - state.k0] = 1;
            for (int k = std::max(s, state.k0); k < s + p(i) && k < horizon; ++k) on[i][k - state.k0] = 1;
        }
    }
}

std::vector<double> FlowShop::load(const Plan& plan) const {
    const int T = std::max(horizon - state.k0, 0);
    std::vector<double> w(T, 0.0);
    const int M = machines();
    for (int i = 0; i < M; ++i) {
        const double pw = params->machine_power[i];
        const auto& m = state.machines[i];
        if (m.remaining > 0) {
            int a = state.k0 + (m.up ? 0 : 1);
            for (int k = a; k < a + m.remaining && k < horizon; ++k) w[k - state.k0] += pw;
        }
        for (int s : plan.starts[i])
            for (int k = std::max(s, state.k0); k < s + p(i) && k < horizon; ++k) w[k - state.k0] += pw;
    }
    return w;
}

int flow_shop_makespan(const std::vector<int>& op_time, int n_jobs) {
    if (n_jobs <= 0) return 0;
    std::vector<int> c(op_time.size(), 0);
    for (int j = 0; j < n_jobs; ++j) {
        int prev = 0;
        for (std::size_t i = 0; i < op_time.size(); ++i) {
            c[i] = std::max(c[i], prev) + op_time[i];
            prev = c[i];
        }
    }
    return c.back();
}

}  // namespace eths
