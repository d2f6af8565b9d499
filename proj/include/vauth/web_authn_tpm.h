/*
 * C boundary of the TPM-backed key store.
 *
 * Key hierarchy: storage root key -> user (storage) keys -> relying party
 * signing keys. Every key below the root leaves the device only as a blob
 * whose private part is encrypted under its parent.
 *
 * Memory rule: whoever allocates a buffer frees it. Records returned by
 * these calls point into storage owned by the TPM handle. They stay valid
 * until the next call returning the same record type on that handle, or
 * until uninstall_tpm. Callers copy what they need to keep.
 *
 * No call raises an exception. Failures return a nonzero TPM_RC or a
 * record whose byte arrays have size 0; get_last_error explains why.
 */
#ifndef VAUTH_WEB_AUTHN_TPM_H
#define VAUTH_WEB_AUTHN_TPM_H

#include <stdbool.h>
#include <stdint.h>

#include "vauth/export.h"

#ifdef __cplusplus
extern "C" {
#endif

typedef uint8_t Byte;
typedef int32_t TPM_RC;

typedef struct Byte_array {
    uint16_t size;
    Byte* data;
} Byte_array;

typedef struct Key_data {
    Byte_array public_data;
    Byte_array private_data;
} Key_data;

typedef struct Key_ecc_point {
    Byte_array x_coord;
    Byte_array y_coord;
} Key_ecc_point;

typedef struct Relying_party_key {
    Key_data key_blob;
    Key_ecc_point key_point;
} Relying_party_key;

typedef struct Ecdsa_sig {
    Byte_array sig_r;
    Byte_array sig_s;
} Ecdsa_sig;

#define VAUTH_TPM_RC_SUCCESS ((TPM_RC)0x000)
#define VAUTH_TPM_RC_VALUE ((TPM_RC)0x084)
#define VAUTH_TPM_RC_HANDLE ((TPM_RC)0x08B)
#define VAUTH_TPM_RC_AUTH_FAIL ((TPM_RC)0x08E)
#define VAUTH_TPM_RC_SIZE ((TPM_RC)0x095)
#define VAUTH_TPM_RC_INTEGRITY ((TPM_RC)0x09F)
#define VAUTH_TPM_RC_INITIALIZE ((TPM_RC)0x100)
#define VAUTH_TPM_RC_FAILURE ((TPM_RC)0x101)

/* Allocate a TPM object and return an opaque pointer to it. */
VAUTH_API void* install_tpm(void);

/* Create (first run) or reload the persistent storage root key in
 * tpm_data_dir. Only the simulator is available; use_hw_tpm must be false.
 * log_filename may be NULL or empty for the default tpm_log_<TIMESTAMP>. */
VAUTH_API int32_t setup_tpm(void* v_tpm_ptr, bool use_hw_tpm, const char* tpm_data_dir,
                            const char* log_filename);

/* 1 -- errors only, 2 -- basic information, 3 -- full information. */
VAUTH_API TPM_RC set_log_level(void* v_tpm_ptr, int log_level);

/* Returns the last error, then resets it to the empty string. */
VAUTH_API const char* get_last_error(void* v_tpm_ptr);

/* Flush loaded keys and free the object. */
VAUTH_API void uninstall_tpm(void* v_tpm_ptr);

/* No parent authorisation: the storage root key has no password. Any
 * loaded user key and its relying party key are flushed first. */
VAUTH_API Key_data create_and_load_user_key(void* v_tpm_ptr, Byte_array user, Byte_array key_auth);

/* Key authorisation is not needed to load the key. */
VAUTH_API TPM_RC load_user_key(void* v_tpm_ptr, Key_data kd, Byte_array user);

VAUTH_API Relying_party_key create_and_load_rp_key(void* v_tpm_ptr, Byte_array relying_party,
                                                   Byte_array user_auth, Byte_array rp_key_auth);

VAUTH_API Key_ecc_point load_rp_key(void* v_tpm_ptr, Key_data kd, Byte_array relying_party,
                                    Byte_array user_auth);

/* signing_data is a digest of at most 32 bytes; it is signed as given. */
VAUTH_API Ecdsa_sig sign_using_rp_key(void* v_tpm_ptr, Byte_array relying_party, Byte_array signing_data,
                                      Byte_array rp_key_auth);

VAUTH_API TPM_RC flush_data(void* v_tpm_ptr);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif
