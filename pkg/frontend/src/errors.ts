export class StaleArtifactError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "StaleArtifactError";
    }
}

export class SchemaError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "SchemaError";
    }
}

export class NoDataError extends Error {
    constructor(message: string) {
        super(message);
        this.name = "NoDataError";
    }
}
