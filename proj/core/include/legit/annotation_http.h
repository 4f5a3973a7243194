// Copyright 2026 The LEGIT Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LEGIT_ANNOTATION_HTTP_H_
#define LEGIT_ANNOTATION_HTTP_H_

#include <memory>
#include <string>

#include "legit/annotation_service.h"
#include "legit/error.h"

namespace legit {

// JSON-over-HTTP front end for an AnnotationService.
//   POST /session              {"annotator": id} -> {"token": t}
//   GET  /batch                -> {"items": [{"id", "image1", "image2"}]}
//   POST /label                {"item": id, "label": "L1|L2|BL|NL"}
//                              -> {"completed": n, "status": "active|disqualified"}
//   POST /admin/round/advance  -> round
//   POST /admin/round/close    -> round
//   GET  /admin/export         -> {"annotations": jsonl, "stats": {...}}
//   GET  /img/<id>/<1|2>.png
// Annotator calls carry "Authorization: Bearer <token>" (or ?token=).
// Admin calls need "X-Admin-Token" when an admin token is configured.
// Errors are {"error": <code name>, "message": ...} with a 4xx status.
class AnnotationHttpServer {
 public:
  AnnotationHttpServer(AnnotationService& service, std::string admin_token = "");
  ~AnnotationHttpServer();
  AnnotationHttpServer(const AnnotationHttpServer&) = delete;
  AnnotationHttpServer& operator=(const AnnotationHttpServer&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Returns the bound port; throws Io when binding fails.
  int Start(const std::string& host, int port);
  // Serves on the calling thread until Stop() is called from elsewhere.
  void Run(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status for a domain error code.
int HttpStatusFor(ErrorCode code);

}  // namespace legit

#endif  // LEGIT_ANNOTATION_HTTP_H_
