/* @ts-self-types="./asvrg_demo.d.ts" */

/**
 * Per-epoch objective gaps of each solver, against a batch reference.
 */
export class Race {
    static __wrap(ptr) {
        const obj = Object.create(Race.prototype);
        obj.__wbg_ptr = ptr;
        RaceFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        RaceFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_race_free(ptr, 0);
    }
    /**
     * @param {number} k
     * @returns {Float64Array}
     */
    gaps(k) {
        const ret = wasm.race_gaps(this.__wbg_ptr, k);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @param {number} k
     * @returns {string}
     */
    name(k) {
        let deferred1_0;
        let deferred1_1;
        try {
            const ret = wasm.race_name(this.__wbg_ptr, k);
            deferred1_0 = ret[0];
            deferred1_1 = ret[1];
            return getStringFromWasm0(ret[0], ret[1]);
        } finally {
            wasm.__wbindgen_free(deferred1_0, deferred1_1, 1);
        }
    }
    /**
     * @param {number} k
     * @returns {Float64Array}
     */
    passes(k) {
        const ret = wasm.race_passes(this.__wbg_ptr, k);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    solver_count() {
        const ret = wasm.race_solver_count(this.__wbg_ptr);
        return ret >>> 0;
    }
}
if (Symbol.dispose) Race.prototype[Symbol.dispose] = Race.prototype.free;

/**
 * `ρ(θ)` sampled on a grid, with the optimal weight and its step size.
 */
export class RateCurve {
    static __wrap(ptr) {
        const obj = Object.create(RateCurve.prototype);
        obj.__wbg_ptr = ptr;
        RateCurveFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        RateCurveFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_ratecurve_free(ptr, 0);
    }
    /**
     * @returns {number}
     */
    get beta_star() {
        const ret = wasm.ratecurve_beta_star(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get eta_star() {
        const ret = wasm.ratecurve_eta_star(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get m() {
        const ret = wasm.ratecurve_m(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {Float64Array}
     */
    get rhos() {
        const ret = wasm.ratecurve_rhos(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {number}
     */
    get theta_star() {
        const ret = wasm.ratecurve_theta_star(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {Float64Array}
     */
    get thetas() {
        const ret = wasm.ratecurve_thetas(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) RateCurve.prototype[Symbol.dispose] = RateCurve.prototype.free;

/**
 * Runs the three stochastic solvers for `epochs` epochs with step
 * `eta_scale / L` (the VR solvers) and `4·eta_scale / L` (STOC-ADMM).
 * @param {number} n
 * @param {number} d
 * @param {bigint} seed
 * @param {number} epochs
 * @param {number} lambda1
 * @param {number} eta_scale
 * @returns {Race}
 */
export function race(n, d, seed, epochs, lambda1, eta_scale) {
    const ret = wasm.race(n, d, seed, epochs, lambda1, eta_scale);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Race.__wrap(ret[0]);
}

/**
 * Rate curve for condition numbers `kappa = L/μ` and `omega = ‖AᵀA‖/σ_min`
 * with `n` samples, batch size `b` and epoch length `m` (0 picks the
 * smallest admissible length, doubled).
 * @param {number} kappa
 * @param {number} omega
 * @param {number} n
 * @param {number} b
 * @param {number} m
 * @param {number} points
 * @returns {RateCurve}
 */
export function rate_curve(kappa, omega, n, b, m, points) {
    const ret = wasm.rate_curve(kappa, omega, n, b, m, points);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return RateCurve.__wrap(ret[0]);
}

/**
 * `θ₀, θ₁, …, θ_steps` of the decaying recursion.
 * @param {number} theta0
 * @param {number} steps
 * @returns {Float64Array}
 */
export function theta_schedule(theta0, steps) {
    const ret = wasm.theta_schedule(theta0, steps);
    if (ret[3]) {
        throw takeFromExternrefTable0(ret[2]);
    }
    var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
    wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
    return v1;
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_92b29b0548f8b746: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_344f42d3211c4765: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./asvrg_demo_bg.js": import0,
    };
}

const RaceFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_race_free(ptr, 1));
const RateCurveFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_ratecurve_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = module.ok && expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('asvrg_demo_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
