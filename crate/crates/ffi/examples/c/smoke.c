#include <stdio.h>
#include "pvtrack.h"

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: smoke SCENARIO.toml\n");
        return 2;
    }
    PvtPanel *panel = NULL;
    if (pvt_panel_new(pvt_panel_params_reference(), &panel) != PVT_STATUS_OK) {
        fprintf(stderr, "%s\n", pvt_last_error());
        return 1;
    }
    PvtPoint mpp;
    pvt_panel_true_mpp(panel, 1000.0, 25.0, &mpp);
    printf("p_mpp %.6f\n", mpp.p);
    pvt_panel_free(panel);

    PvtScenario *sc = NULL;
    PvtTrace *tr = NULL;
    PvtStatus st = pvt_scenario_load(argv[1], &sc);
    if (st == PVT_STATUS_OK)
        st = pvt_simulate(sc, "hybrid", &tr);
    if (st != PVT_STATUS_OK) {
        fprintf(stderr, "%s: %s\n", pvt_status_str(st), pvt_last_error());
        pvt_scenario_free(sc);
        return 1;
    }
    double eff = 0.0;
    pvt_trace_efficiency(tr, &eff);
    printf("records %zu\nefficiency %.6f\n", pvt_trace_len(tr), eff);

    st = pvt_simulate(sc, "bogus", &tr);
    printf("bogus %d\n", (int)st);

    pvt_trace_free(tr);
    pvt_scenario_free(sc);
    return 0;
}
