/*
 * C interface to the virtual FIDO2 authenticator.
 *
 * Three handle types:
 *   vauth_device  - the authenticator behind a CTAPHID report interface;
 *                   the caller feeds 64-byte reports in and receives
 *                   reports through a callback.
 *   vauth_daemon  - a device served over the configured transport
 *                   (Unix socket or in-process loopback).
 *   vauth_client  - the conformance client; every response is verified
 *                   before a call reports success.
 *
 * Every call returns a vauth_status. On failure vauth_last_error() gives
 * a message for the calling thread. Strings and byte buffers returned
 * through out-parameters belong to the caller and are released with
 * vauth_free_string / vauth_free_bytes.
 */
#ifndef VAUTH_VAUTH_H
#define VAUTH_VAUTH_H

#include <stddef.h>
#include <stdint.h>

#include "vauth/export.h"

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vauth_status {
    VAUTH_OK = 0,
    VAUTH_ERR_ARGUMENT = 1,
    VAUTH_ERR_CONFIG = 2,
    VAUTH_ERR_STORAGE = 3,
    VAUTH_ERR_STORAGE_AUTH = 4, /* wrong storage password or tampered file */
    VAUTH_ERR_TRANSPORT = 5,
    VAUTH_ERR_CTAP = 6,         /* nonzero CTAP2 status, see vauth_client_last_ctap_status */
    VAUTH_ERR_CTAPHID = 7,      /* CTAPHID ERROR reply, see vauth_client_last_hid_error */
    VAUTH_ERR_VERIFY = 8,       /* a response failed the client's checks */
    VAUTH_ERR_CRYPTO = 9,
    VAUTH_ERR_INTERNAL = 10
} vauth_status;

VAUTH_API const char* vauth_status_name(vauth_status status);
/* Message for the last failure on this thread; empty string if none. */
VAUTH_API const char* vauth_last_error(void);
VAUTH_API void vauth_free_string(char* s);
VAUTH_API void vauth_free_bytes(uint8_t* b);

/* Configuration: flat key=value settings; unknown keys are rejected. */
typedef struct vauth_config vauth_config;

VAUTH_API vauth_config* vauth_config_new(void);
VAUTH_API vauth_status vauth_config_load(vauth_config* config, const char* path);
VAUTH_API vauth_status vauth_config_parse(vauth_config* config, const char* text);
VAUTH_API vauth_status vauth_config_set(vauth_config* config, const char* key, const char* value);
VAUTH_API void vauth_config_free(vauth_config* config);

/* Device */
typedef struct vauth_device vauth_device;
typedef void (*vauth_report_fn)(void* user, const uint8_t* report, size_t len);

VAUTH_API vauth_status vauth_device_create(const vauth_config* config, vauth_report_fn on_report, void* user,
                                           vauth_device** out);
/* `len` must be 64; other sizes are dropped as the HID layer would. */
VAUTH_API vauth_status vauth_device_handle_report(vauth_device* device, const uint8_t* report, size_t len);
/* Returns 1 when idle, 0 on timeout. */
VAUTH_API int vauth_device_wait_idle(vauth_device* device, unsigned timeout_ms);
VAUTH_API void vauth_device_free(vauth_device* device);

/* Daemon. Log files go to the configured log directory. */
typedef struct vauth_daemon vauth_daemon;

VAUTH_API vauth_status vauth_daemon_create(const vauth_config* config, vauth_daemon** out);
/* Serves until vauth_daemon_stop, a policy shutdown request or transport close. */
VAUTH_API vauth_status vauth_daemon_run(vauth_daemon* daemon);
/* Runs the daemon on a background thread. */
VAUTH_API vauth_status vauth_daemon_start(vauth_daemon* daemon);
/* Async-signal-safe. */
VAUTH_API void vauth_daemon_stop(vauth_daemon* daemon);
/* Stops and joins a started daemon, then releases it. */
VAUTH_API void vauth_daemon_free(vauth_daemon* daemon);

/* Client. `records_path` may be NULL for an in-memory record book;
 * otherwise it is loaded on connect and saved after every change. */
typedef struct vauth_client vauth_client;

VAUTH_API vauth_status vauth_client_connect(const char* socket_path, const char* records_path, vauth_client** out);
/* Host end of a loopback daemon; only one client per daemon. */
VAUTH_API vauth_status vauth_client_connect_loopback(vauth_daemon* daemon, const char* records_path,
                                                     vauth_client** out);

/* options: {"rp_id", "rp_name"?, "user_id" (hex), "user_name", "display_name"?,
 *           "resident"?, "pin"?, "exclude"? [hex]}  */
VAUTH_API vauth_status vauth_client_register(vauth_client* client, const char* options_json, char** result_json);
/* options: {"rp_id", "allow"? [hex], "pin"?, "up"?} */
VAUTH_API vauth_status vauth_client_assert(vauth_client* client, const char* options_json, char** result_json);
VAUTH_API vauth_status vauth_client_get_info(vauth_client* client, char** result_json);
VAUTH_API vauth_status vauth_client_pin_set(vauth_client* client, const char* pin);
VAUTH_API vauth_status vauth_client_pin_change(vauth_client* client, const char* old_pin, const char* new_pin);
/* result: {"pin_token": hex} */
VAUTH_API vauth_status vauth_client_pin_token(vauth_client* client, const char* pin, char** result_json);
VAUTH_API vauth_status vauth_client_pin_retries(vauth_client* client, int* retries);
VAUTH_API vauth_status vauth_client_reset(vauth_client* client);
VAUTH_API vauth_status vauth_client_ping(vauth_client* client, const uint8_t* data, size_t len, uint8_t** echo,
                                         size_t* echo_len);
VAUTH_API int vauth_client_last_ctap_status(const vauth_client* client);
VAUTH_API int vauth_client_last_hid_error(const vauth_client* client);
VAUTH_API void vauth_client_free(vauth_client* client);

#ifdef __cplusplus
}
#endif

#endif
