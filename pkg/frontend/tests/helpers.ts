import fs from "node:fs/promises";
import path from "node:path";

// Fixture loading that works in both the node and jsdom environments, where
// import.meta.url may not be a file URL. Vitest runs from the package root.
export function fixturePath(name: string): string {
  return path.join(process.cwd(), "tests", "fixtures", name);
}

export async function loadFixture(name: string): Promise<string> {
  return fs.readFile(fixturePath(name), "utf8");
}
