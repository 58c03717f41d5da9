// The worked demonstration: three stacking rounds over four blocks.

import type { SessionConfig } from "./protocol.js";

export const DEMO_CONFIG: SessionConfig = {
  scene: {
    table: [1000, 1000],
    targets: { stack: [0, -250] },
    objects: [
      { id: "green", color: "green", size: "large", shape: "block", footprint: [80, 80], height: 60, position: [-300, 150] },
      { id: "red", color: "red", size: "small", shape: "block", footprint: [40, 40], height: 40, position: [-100, 150] },
      { id: "blue", color: "blue", size: "small", shape: "block", footprint: [40, 40], height: 40, position: [100, 150] },
      { id: "yellow", color: "yellow", size: "small", shape: "block", footprint: [40, 40], height: 40, position: [300, 150] },
    ],
  },
  tasks: [
    { candidates: ["green", "red", "blue", "yellow"], target: "stack" },
    { candidates: ["red", "blue", "yellow"], target: "stack" },
    { candidates: ["blue", "yellow"], target: "stack" },
  ],
  observation: { p_correct: 0.8 },
  rewards: {},
  discount: 0.99,
};
