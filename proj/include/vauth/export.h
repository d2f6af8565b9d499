#ifndef VAUTH_EXPORT_H
#define VAUTH_EXPORT_H

#if defined(_WIN32)
#define VAUTH_API __declspec(dllexport)
#else
#define VAUTH_API __attribute__((visibility("default")))
#endif

#endif
