import { init } from "./app";

document.addEventListener("DOMContentLoaded", () => {
  void init(document);
});
