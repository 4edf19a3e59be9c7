#include <stdio.h>
#include <string.h>

#include "prodint.h"

static const char *SOURCE =
    "input n in [0, 8];\n"
    "arr := new Int[n];\n"
    "for (i := 0; i < arr.length; i := i + 1)\n"
    "  arr[i] := 0;\n";

int main(void) {
  ProdintProgram *prog = NULL;
  if (prodint_program_parse(SOURCE, &prog) != PRODINT_STATUS_OK) {
    fprintf(stderr, "parse: %s\n", prodint_last_error_message());
    return 10;
  }
  ProdintConfig *cfg = prodint_config_new();
  if (prodint_config_set(cfg, "domains", "interval,diff") != PRODINT_STATUS_OK ||
      prodint_config_set(cfg, "product", "cartesian") != PRODINT_STATUS_OK) {
    fprintf(stderr, "config: %s\n", prodint_last_error_message());
    return 11;
  }
  ProdintResult *res = NULL;
  if (prodint_analyze(prog, cfg, true, &res) != PRODINT_STATUS_OK) {
    fprintf(stderr, "analyze: %s\n", prodint_last_error_message());
    return 12;
  }
  size_t n = prodint_result_obligation_count(res);
  for (size_t i = 0; i < n; i++) {
    ProdintObligation o;
    if (prodint_result_obligation(res, i, &o) != PRODINT_STATUS_OK) return 13;
    printf("%u:%u %d %s\n", o.line, o.col, (int)o.kind,
           o.verdict == PRODINT_VERDICT_PROVED ? "PROVED" : "UNKNOWN");
  }
  char *json = prodint_result_to_json(res);
  if (json == NULL || strstr(json, "\"violations\": []") == NULL) return 14;
  int code = prodint_result_exit_code(res);
  prodint_string_free(json);
  prodint_result_free(res);
  prodint_config_free(cfg);
  prodint_program_free(prog);
  printf("exit %d\n", code);
  return 0;
}
