import { createHash } from "node:crypto";
import { existsSync, readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { StaleArtifactError } from "./errors";

export interface ManifestEntry {
    digest: string;
    relPath: string;
    absPath: string;
}

export function sha256File(path: string): string {
    return createHash("sha256").update(readFileSync(path)).digest("hex");
}

/** Parse manifest.txt and verify every checksum against the file on disk. */
export function loadManifest(manifestPath: string): ManifestEntry[] {
    const base = dirname(manifestPath);
    const entries: ManifestEntry[] = [];
    for (const line of readFileSync(manifestPath, "utf8").split("\n")) {
        const trimmed = line.trim();
        if (!trimmed || trimmed.startsWith("#")) continue;
        const sep = trimmed.indexOf("  ");
        if (sep < 0) throw new StaleArtifactError(`malformed manifest line: ${trimmed}`);
        const digest = trimmed.slice(0, sep);
        const relPath = trimmed.slice(sep + 2).trim();
        const absPath = join(base, relPath);
        if (!existsSync(absPath)) {
            throw new StaleArtifactError(`manifest entry missing on disk: ${relPath}`);
        }
        if (sha256File(absPath) !== digest) {
            throw new StaleArtifactError(`checksum mismatch for ${relPath}`);
        }
        entries.push({ digest, relPath, absPath });
    }
    return entries;
}
