#include <stdio.h>
#include <string.h>

#include "fifo_routes.h"

#define CHECK(cond)                                                     \
  do {                                                                  \
    if (!(cond)) {                                                      \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,    \
              fifo_last_error());                                       \
      return 1;                                                         \
    }                                                                   \
  } while (0)

int main(void) {
  FifoGeneratorSpec spec = {3, 8, 4, 600, 1200, 0.7, 5};
  FifoTimetable *tt = NULL;
  CHECK(fifo_timetable_generate(&spec, &tt) == FIFO_STATUS_OK);
  CHECK(fifo_timetable_trip_count(tt) == 24);

  size_t routes[3];
  FifoAlgorithm algs[3] = {FIFO_ALGORITHM_OPTIMAL, FIFO_ALGORITHM_GREEDY,
                           FIFO_ALGORITHM_TRIVIAL};
  for (int i = 0; i < 3; i++) {
    FifoPartition *p = NULL;
    CHECK(fifo_solve(tt, algs[i], 10, &p) == FIFO_STATUS_OK);
    routes[i] = fifo_partition_route_count(p);
    FifoVerification v;
    CHECK(fifo_verify(tt, p, &v) == FIFO_STATUS_OK);
    CHECK(v.valid && v.violations == 0);
    CHECK(v.certificate_valid == (i == 0 ? 1 : -1));

    char *csv = NULL;
    CHECK(fifo_partition_to_csv(p, &csv) == FIFO_STATUS_OK);
    CHECK(strncmp(csv, "trip_id,route_id\n", 17) == 0);
    fifo_string_free(csv);
    fifo_partition_free(p);
  }
  CHECK(routes[0] <= routes[1] && routes[1] <= routes[2] && routes[2] == 24);

  FifoPartition *p = NULL;
  CHECK(fifo_solve(tt, FIFO_ALGORITHM_BRUTE, 4, &p) ==
        FIFO_STATUS_SOLVER_REFUSED);
  CHECK(p == NULL);
  CHECK(strlen(fifo_last_error()) > 0);

  FifoTimetable *bad = NULL;
  CHECK(fifo_timetable_from_json("{", &bad) == FIFO_STATUS_INVALID_INPUT);
  CHECK(fifo_timetable_from_json(NULL, &bad) == FIFO_STATUS_NULL_ARGUMENT);

  char *json = NULL;
  CHECK(fifo_timetable_to_json(tt, &json) == FIFO_STATUS_OK);
  FifoTimetable *copy = NULL;
  CHECK(fifo_timetable_from_json(json, &copy) == FIFO_STATUS_OK);
  CHECK(fifo_timetable_trip_count(copy) == 24);
  fifo_string_free(json);
  fifo_timetable_free(copy);
  fifo_timetable_free(tt);
  puts("ok");
  return 0;
}
