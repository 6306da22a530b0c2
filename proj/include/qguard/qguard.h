#ifndef QGUARD_QGUARD_H
#define QGUARD_QGUARD_H

/*
 * C API for the qguard moderation engine. All rich payloads cross the
 * boundary as JSON strings allocated by the library; release them with
 * qguard_string_free(). Handles are opaque; every call returns a status
 * code and qguard_last_error() carries the thread-local failure detail.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qguard_status {
  QGUARD_OK = 0,
  QGUARD_ERR_INVALID_ARGUMENT = 1,
  QGUARD_ERR_PARSE = 2,
  QGUARD_ERR_VALIDATION = 3,
  QGUARD_ERR_IO = 4,
  QGUARD_ERR_BACKEND = 5,
  QGUARD_ERR_INDETERMINATE = 6,
  QGUARD_ERR_INTERNAL = 7
} qguard_status;

typedef struct qguard_engine qguard_engine;

const char* qguard_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* qguard_last_error(void);

void qguard_string_free(char* s);

/* config_json: the engine config document (see README: listen, questions,
 * backend, threshold, method, ...). */
qguard_status qguard_engine_create(const char* config_json, qguard_engine** out);
qguard_status qguard_engine_create_from_file(const char* config_path, qguard_engine** out);
void qguard_engine_destroy(qguard_engine* engine);

/* request_json: {"text": "...", "image_path"?: "...", "image_b64"?: "...",
 * "media_type"?: "...", "threshold"?: number, "method"?: "graph|avg|baseline",
 * "include_report"?: bool}. On success *response_json_out holds the decision
 * document. With fail_closed off, an indeterminate run returns
 * QGUARD_ERR_INDETERMINATE and no response. */
qguard_status qguard_classify(qguard_engine* engine, const char* request_json,
                              char** response_json_out);

/* Scores a JSONL dataset and returns the full metrics document. */
qguard_status qguard_eval(qguard_engine* engine, const char* dataset_path,
                          char** metrics_json_out);

/* Graphviz DOT text of the filtering graph for one input. */
qguard_status qguard_export_graph(qguard_engine* engine, const char* request_json,
                                  char** dot_out);

/* Re-reads the configured question file; *version_out gets the active version. */
qguard_status qguard_reload(qguard_engine* engine, char** version_out);

/* Runs the HTTP gateway on the configured listen address. Blocks until the
 * server stops (SIGINT/SIGTERM or qguard_serve_stop from another thread). */
qguard_status qguard_serve(qguard_engine* engine);
qguard_status qguard_serve_stop(qguard_engine* engine);

#ifdef __cplusplus
}
#endif

#endif /* QGUARD_QGUARD_H */
