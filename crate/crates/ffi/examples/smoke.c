#include <math.h>
#include <stdio.h>

#include "fpddp.h"

int main(void) {
    FpddpProblem *problem = NULL;
    if (fpddp_problem_new("cart_pendulum", 2.5, &problem) != FPDDP_ERROR_CODE_OK) {
        fprintf(stderr, "%s\n", fpddp_last_error_message());
        return 1;
    }
    FpddpResult *result = NULL;
    if (fpddp_solve(problem, FPDDP_SOLVER_FPDDP, NAN, NULL, &result) != FPDDP_ERROR_CODE_OK) {
        fprintf(stderr, "%s\n", fpddp_last_error_message());
        fpddp_problem_free(problem);
        return 1;
    }
    FpddpSummary summary;
    fpddp_result_summary(result, &summary);
    printf("status %d after %u iterations, f = %g\n", (int)summary.status, summary.iterations, summary.objective);
    fpddp_result_free(result);
    fpddp_problem_free(problem);
    return summary.status == FPDDP_STATUS_FEASIBLE ? 0 : 1;
}
