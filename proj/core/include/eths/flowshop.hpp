#pragma once

#include <vector>

#include "eths/params.hpp"

namespace eths {

// Production status of one machine at the first tick of a planning window.
struct MachineStatus {
    bool up = true;  // down machines are assumed repaired one tick later
    int remaining = 0;  // work ticks left on the operation in progress
    int done = 0;       // operations finished
    int started = 0;    // operations started (done, plus one if in progress)
};

struct ShopState {
    int k0 = 0;
    std::vector<MachineStatus> machines;

    static ShopState fresh(int machines, int k0 = 0);
    // tick at which the operation in progress completes, or -1
    int active_finish(int i) const;
    // first tick at which machine i can start a new operation
    int available(int i) const;
};

// Planned start ticks of the operations not yet started: starts[i][q] is the
// start of the q-th remaining operation on machine i (job shop.started + q).
struct Plan {
    std::vector<std::vector<int>> starts;
};

struct FlowShop {
    const PlantParameters* params;
    ShopState state;
    int n_jobs;     // total job target
    int deadline;   // completion tick bound of the last job on the last machine
    int horizon;    // every operation finishes by this tick

    int machines() const { return static_cast<int>(state.machines.size()); }
    int remaining(int i) const { return n_jobs - state.machines[i].started; }
    int p(int i) const { return params->op_time[i]; }

    // completion of job j on machine i under plan (tick at which it counts as finished)
    int completion(const Plan& plan, int i, int j) const;

    // Earliest starts (ASAP). Also the exact minimum completion time.
    Plan earliest() const;
    // Latest starts meeting the deadline; empty starts if impossible.
    Plan latest() const;
    int completion_lower_bound() const;  // ASAP completion of the final operation

    bool feasible(const Plan& plan, bool check_deadline = true) const;
    // Per-tick machine demand on [k0, horizon).
    std::vector<double> load(const Plan& plan) const;
    // machine_on[i][tick-k0], op_start[i][tick-k0]
    void occupancy(const Plan& plan, std::vector<std::vector<int>>& on, std::vector<std::vector<int>>& start) const;
};

// Minimum makespan of n identical jobs from an empty shop.
int flow_shop_makespan(const std::vector<int>& op_time, int n_jobs);

}  // namespace eths
