export * from "./api.js";
export * from "./weights.js";
export * from "./heatmap.js";
export * from "./inspector.js";
export * from "./state.js";
export * from "./triage.js";
export * from "./planboard.js";
export { bootstrap } from "./app.js";
