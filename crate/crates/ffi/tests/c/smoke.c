#include <stdio.h>
#include "sysrisk.h"

int main(void) {
    SysriskMarket *market = NULL;
    SysriskDynamics *dynamics = NULL;
    SysriskTrajectory *run = NULL;
    SysriskThresholds th;
    SysriskRound last;

    if (sysrisk_preset("t2-r1", &market, &dynamics) != SYSRISK_STATUS_OK) return 1;
    if (sysrisk_thresholds(market, &th) != SYSRISK_STATUS_OK) return 2;
    if (sysrisk_simulate(market, dynamics, 1, &run) != SYSRISK_STATUS_OK) return 3;
    size_t n = sysrisk_trajectory_len(run);
    if (sysrisk_trajectory_round(run, n - 1, &last) != SYSRISK_STATUS_OK) return 4;
    if (sysrisk_thresholds(NULL, &th) != SYSRISK_STATUS_NULL_POINTER) return 5;
    printf("switch_point=%.6f rounds=%zu final_eps=%.4f error=%s\n",
           th.switch_point, n, last.eps, sysrisk_last_error_message());
    sysrisk_trajectory_free(run);
    sysrisk_dynamics_free(dynamics);
    sysrisk_market_free(market);
    return 0;
}
