#!/usr/bin/env node
import { render } from "./render";

function main(argv: string[]): number {
    if (argv.length !== 3) {
        process.stderr.write("usage: fpnet-plots <manifest> <plotspec-file> <out-image>\n");
        return 2;
    }
    const [manifest, spec, outImage] = argv;
    try {
        render(manifest, spec, outImage);
        process.stdout.write(`wrote ${outImage}\n`);
        return 0;
    } catch (err) {
        const e = err as Error;
        process.stderr.write(`error: ${e.name}: ${e.message}\n`);
        return 1;
    }
}

process.exit(main(process.argv.slice(2)));
